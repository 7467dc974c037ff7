#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clu/buffer.hpp"
#include "clu/model.hpp"
#include "clu/rng.hpp"
#include "clu/task.hpp"

namespace clu {

/// Fast-slow weight hyperparameters. The inner loop takes one masked,
/// weighted task step followed by k_inner replay steps; the outer loop
/// interpolates toward the fine-tuned point with rate alpha.
struct FastSlowConfig {
    double alpha = 1.0;
    double beta_learn = 0.1;
    double beta_unlearn = 0.05;
    double beta_remain = 0.1;
    int k_inner = 1;
    int k_outer = 1;
    int k_outer_unlearn = 0;     // 0 = use k_outer; unlearning often needs its own budget

    int task_batch = 0;          // 0 = whole task dataset
    int remain_batch = 64;       // replay batch size inside the inner loop
    int remain_probe_cap = 4096; // max samples used for the initial remaining-gradient probe

    void validate() const;

    int outer_iters(TaskKind kind) const {
        return (kind == TaskKind::Unlearn && k_outer_unlearn > 0) ? k_outer_unlearn : k_outer;
    }
};

struct CoefficientSchedule {
    double lambda_learn = 1.0;
    double lambda_unlearn = 1.0;
    double epsilon_floor = 1e-8;  // losses are floored here before 1/loss^lambda
};

struct SaliencyConfig {
    double gamma = 1.0;
    double ratio_floor = 1e-12;  // denominator floor in the magnitude ratio
};

/// Binary mask over the flat parameter vector (entries 0.0 or 1.0).
using SaliencyMask = Eigen::VectorXd;

/// Learning-task sample coefficients: min(1, (k/K) * (1/loss_i^lambda) /
/// sum_j(1/loss_j^lambda) * N). Losses enter as detached constants.
Eigen::VectorXd adaptive_coeffs_learn(const Eigen::VectorXd& losses, int k, int K,
                                      const CoefficientSchedule& sched);

/// Unlearning-task sample coefficients: (1 - k/K) * (1/loss_i^lambda) /
/// sum_j(1/loss_j^lambda) * N. Uncapped.
Eigen::VectorXd adaptive_coeffs_unlearn(const Eigen::VectorXd& losses, int k, int K,
                                        const CoefficientSchedule& sched);

/// Keep coordinate j iff grad_task_abs[j] / max(grad_remain0_abs[j], floor) >= gamma.
SaliencyMask saliency_mask(const Eigen::VectorXd& grad_task_abs,
                           const Eigen::VectorXd& grad_remain0_abs, const SaliencyConfig& cfg);

/// Masked task step. Gradients use mean reduction over the batch: the
/// applied weights are (1 - coeffs)/n for learning and (-coeffs)/n for
/// unlearning, so an all-zero coefficient vector on a learn task reduces to
/// a plain SGD step.
ParamVector fast_step(const Model& model, const ParamVector& params, const Batch& task_batch,
                      const Eigen::VectorXd& coeffs, const SaliencyMask& mask, double beta,
                      TaskKind direction);

/// k_inner mean-gradient descent steps on buffer batches starting from
/// theta_q. Identity when the buffer is empty or k_inner is zero.
ParamVector inner_finetune(const Model& model, const ParamVector& theta_q, ReservoirBuffer& buffer,
                           double beta_remain, int k_inner, int batch_size);

/// theta_next = (1 - alpha) * theta_k + alpha * theta_r.
ParamVector slow_step(const ParamVector& theta_k, const ParamVector& theta_r, double alpha);

struct IterationTrace {
    int k = 0;
    double task_loss = 0.0;
    double buffer_loss = 0.0;  // NaN when the buffer is empty
    double mask_density = 0.0;
    double coeff_mean = 0.0;
};

struct TaskRunResult {
    ParamVector params;
    std::vector<IterationTrace> trace;
    std::vector<std::string> warnings;
};

/// One full task of the fast-slow loop.
///
/// Preconditions: for unlearn tasks the buffer erasure has already been
/// applied and task.train carries the captured unlearn batch. The initial
/// remaining-gradient magnitude probe is computed once before the loop; the
/// mask and coefficients are recomputed every outer iteration. Learn-task
/// data enters the buffer after the loop finishes.
TaskRunResult run_task(const Model& model, ParamVector params, const TaskMaterial& task,
                       ReservoirBuffer& buffer, const FastSlowConfig& fs,
                       const CoefficientSchedule& sched, const SaliencyConfig& sal, Rng& rng);

}  // namespace clu
