#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clu/rng.hpp"

namespace clu {

enum class Architecture { Mlp, TinyConv, Quadratic };
enum class Activation { Relu, Tanh };

/// Flat model parameter state. Length is fixed by the owning ModelSpec;
/// masks and explicit Hessians index into the same coordinate system.
using ParamVector = Eigen::VectorXd;

/// Per-sample loss weights. May be negative (gradient-ascent encoding).
using SampleWeights = Eigen::VectorXd;

/// Quadratic surrogate loss 0.5 (theta-c)^T A (theta-c) + g^T theta.
/// Used by the numerical verification suite, where second-order claims
/// are exactly checkable; not a classifier.
struct QuadraticLoss {
    Eigen::MatrixXd curvature;  // A, symmetric
    Eigen::VectorXd center;     // c
    Eigen::VectorXd linear;     // g
};

struct ModelSpec {
    Architecture architecture = Architecture::Mlp;
    int input_dim = 0;
    int num_classes = 0;
    std::vector<int> layer_widths;    // MLP hidden widths, in order
    std::vector<int> channel_widths;  // TinyConv channels per stage
    Activation activation = Activation::Relu;

    void validate() const;
};

struct Batch {
    Eigen::MatrixXd features;        // n x input_dim
    Eigen::VectorXi labels;          // n, entries in [0, num_classes)
    std::vector<std::int64_t> ids;   // stable sample identities; may be empty

    int size() const { return static_cast<int>(features.rows()); }
};

/// Row-wise concatenation; parts must agree on feature dimension.
Batch concat_batches(const std::vector<Batch>& parts);

/// A named slice of the flat parameter vector.
struct LayoutEntry {
    std::string name;
    int offset = 0;
    int rows = 0;
    int cols = 0;  // 1 for biases
};

/// Differentiable classifier over a flat parameter vector.
///
/// All operations are pure in (params, batch) and safe to call
/// concurrently. Parameter updates always build new vectors.
class Model {
public:
    explicit Model(ModelSpec spec);

    /// Test-only quadratic surrogate (dimension taken from the loss terms).
    static Model quadratic(QuadraticLoss loss);

    const ModelSpec& spec() const { return spec_; }
    int param_count() const { return param_count_; }
    const std::vector<LayoutEntry>& layout() const { return layout_; }

    /// Seeded uniform(-s, s) with s = sqrt(6 / (fan_in + fan_out)); biases zero.
    ParamVector init_params(Rng& rng) const;

    /// Class posterior probabilities, one row per sample. Rows sum to 1.
    Eigen::MatrixXd forward_probs(const ParamVector& params, const Batch& batch) const;

    /// Cross-entropy -log p(y_i | x_i) per sample, probabilities floored
    /// at 1e-12 inside the log.
    Eigen::VectorXd per_sample_loss(const ParamVector& params, const Batch& batch) const;

    /// sum_i w_i * dloss_i/dtheta. Linear in the weights.
    ParamVector weighted_grad(const ParamVector& params, const Batch& batch,
                              const SampleWeights& weights) const;

    /// Exact dense Hessian of the weighted loss (forward-over-reverse).
    /// Refuses models above param_cap coordinates.
    Eigen::MatrixXd explicit_hessian(const ParamVector& params, const Batch& batch,
                                     const SampleWeights& weights, int param_cap = 2000) const;

    /// Mean loss and accuracy helpers used throughout the harness.
    double mean_loss(const ParamVector& params, const Batch& batch) const;
    double accuracy(const ParamVector& params, const Batch& batch) const;
    Eigen::VectorXi predict(const ParamVector& params, const Batch& batch) const;

private:
    Model() = default;

    void build_layout();
    void check_batch(const Batch& batch) const;
    void check_params(const ParamVector& params) const;

    ModelSpec spec_;
    QuadraticLoss quad_;  // only for Architecture::Quadratic
    int param_count_ = 0;
    std::vector<LayoutEntry> layout_;
    int conv_side_ = 0;  // spatial side length for TinyConv inputs
};

}  // namespace clu
