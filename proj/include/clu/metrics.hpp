#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "clu/model.hpp"
#include "clu/rng.hpp"

namespace clu {

/// a(i, j) = accuracy on the classes of learn task j evaluated at checkpoint
/// i (after task i). Entries are NaN where undefined (checkpoint precedes
/// the task, or every class of the column was unlearned).
struct AccuracyMatrix {
    Eigen::MatrixXd a;

    int checkpoints() const { return static_cast<int>(a.rows()); }
    int tasks() const { return static_cast<int>(a.cols()); }
};

/// Mean of the final checkpoint row over defined columns.
double learning_accuracy(const AccuracyMatrix& m);

/// Mean over all but the last column of (best past accuracy - final
/// accuracy), reported negated so that forgetting shows up as a negative
/// number. Requires at least two columns.
double forgetting_measure(const AccuracyMatrix& m);

/// Mean over targets of the highest post-unlearn accuracy. One inner vector
/// per unlearn target: its accuracy at each checkpoint from the unlearn task
/// to the sequence end.
double unlearning_accuracy(const std::vector<std::vector<double>>& per_target_accuracies);

/// Accuracy of the model on a confusion set against its true labels.
double clean_accuracy(const Model& model, const ParamVector& params, const Batch& true_labeled);

/// Mean sample-wise KL(p(.|x; params_p) || p(.|x; params_q)); probabilities
/// floored at 1e-12. Asymmetric; pass the oracle first for the report metric.
double mean_kl(const Model& model, const ParamVector& params_p, const ParamVector& params_q,
               const Batch& data);

/// Report ordering: KL(oracle || model).
double kl_to_oracle(const Model& model, const ParamVector& model_params,
                    const ParamVector& oracle_params, const Batch& data);

/// Modified prediction entropy of one probability row:
///   -(1 - p_y) log(p_y) - sum_{c != y} p_c log(1 - p_c).
double modified_prediction_entropy(const Eigen::VectorXd& probs, int label);

struct MiaConfig {
    bool use_max_prob = false;  // optional second attack feature; default is entropy-only
    int max_set_size = 512;     // remain/test are subsampled to equal sizes at most this big
    double l2 = 1e-3;
    int iters = 400;
    double lr = 0.5;
};

struct MiaResult {
    double score = 0.0;      // fraction of forget samples predicted "member"
    double train_fpr = 0.0;  // fraction of the test-side training data predicted member
    double train_tpr = 0.0;
};

/// Prediction-entropy membership inference. Trains an L2-regularized,
/// class-balanced logistic regression (gradient descent, in-repo) on
/// remain (label 1) vs test (label 0) prediction metrics, then scores the
/// forget set. Throws ValidationError when either attack class is empty.
MiaResult mia_attack(const Model& model, const ParamVector& params, const Batch& remain,
                     const Batch& test, const Batch& forget, const MiaConfig& cfg, Rng& rng);

double mia_score(const Model& model, const ParamVector& params, const Batch& remain,
                 const Batch& test, const Batch& forget, const MiaConfig& cfg, Rng& rng);

/// Final per-run metric bundle. Optional entries are omitted when a
/// protocol does not define them.
struct MetricReport {
    std::optional<double> la;
    std::optional<double> fm;
    std::optional<double> ua;
    std::optional<double> mia;
    std::optional<double> ca;
    double kl = 0.0;
    double rte_seconds = 0.0;  // method compute only; excluded from metric JSON
};

}  // namespace clu
