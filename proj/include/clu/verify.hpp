#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clu/rng.hpp"

namespace clu {

/// Data-partition shares of the remaining / learning / unlearning sets.
struct PartitionWeights {
    double p_remain = 1.0;
    double p_learn = 0.0;
    double p_unlearn = 0.0;

    void validate() const;  // nonnegative, sum to 1 within 1e-12
};

/// Per-sample weighting coefficients along the optimization path. Boundary
/// instances (learn 0 / unlearn 1) and (learn 1 / unlearn 0) correspond to
/// the initial and the target model.
struct EpsilonPath {
    Eigen::VectorXd eps_learn;
    Eigen::VectorXd eps_unlearn;
};

/// One quadratic loss atom 0.5 (theta - c)^T A (theta - c).
struct QuadraticAtom {
    Eigen::MatrixXd curvature;
    Eigen::VectorXd center;
};

enum class Part { Remain, Learn, Unlearn };

/// A constructed problem instance on which the second-order theory is
/// exactly checkable: each data partition is a weighted sum of quadratic
/// atoms, so gradients and Hessians are closed-form and the stationarity of
/// Assumption-style iterates can be engineered by a linear solve.
struct QuadraticInstance {
    std::vector<QuadraticAtom> remain, learn, unlearn;

    int dim() const;
    const std::vector<QuadraticAtom>& atoms(Part part) const;

    double loss(Part part, const Eigen::VectorXd& theta, const Eigen::VectorXd& weights) const;
    Eigen::VectorXd gradient(Part part, const Eigen::VectorXd& theta,
                             const Eigen::VectorXd& weights) const;
    Eigen::MatrixXd hessian(Part part, const Eigen::VectorXd& weights) const;

    double loss_uniform(Part part, const Eigen::VectorXd& theta) const;
    Eigen::VectorXd gradient_uniform(Part part, const Eigen::VectorXd& theta) const;
    Eigen::MatrixXd hessian_uniform(Part part) const;

    /// argmin L^R + L^L(all-ones): the target of the current task pair.
    Eigen::VectorXd theta_star() const;
    /// argmin L^R + L^U(all-ones): the model before the task pair.
    Eigen::VectorXd theta_zero() const;
    /// Stationary point of L^R + L^L(eps_learn) + L^U(eps_unlearn).
    Eigen::VectorXd theta_for(const EpsilonPath& eps) const;
};

/// SPD solve guarded by a condition-number gate (throws SingularMatrixError).
Eigen::VectorXd spd_solve(const Eigen::MatrixXd& m, const Eigen::VectorXd& rhs);

/// Steepest-descent direction under the Euclidean metric:
///   -alpha [ grad_R p^R
///            + 1/2 (H^L p^L + H^U p^U) (H^R_*)^{-1} (grad_L(1-eps_L) + grad_U(-eps_U)) ].
Eigen::VectorXd vanilla_direction(const QuadraticInstance& inst, const Eigen::VectorXd& theta_k,
                                  const EpsilonPath& eps, const PartitionWeights& weights,
                                  double alpha);

/// Steepest-descent direction under the remaining-output KL metric:
///   -(alpha / (p^R + 1)) (H^R_k)^{-1}
///            1/2 (H^L p^L + H^U p^U) (H^R_*)^{-1} (grad_L(1-eps_L) + grad_U(-eps_U)).
Eigen::VectorXd remain_manifold_direction(const QuadraticInstance& inst,
                                          const Eigen::VectorXd& theta_k, const EpsilonPath& eps,
                                          const PartitionWeights& weights, double alpha);

/// Pure-learning reduction (no unlearning data), written out directly.
Eigen::VectorXd cl_reduction_direction(const QuadraticInstance& inst, const Eigen::VectorXd& theta_k,
                                       const Eigen::VectorXd& eps_learn,
                                       const PartitionWeights& weights, double alpha);

/// Pure-unlearning reduction (no learning data), written out directly.
Eigen::VectorXd mu_reduction_direction(const QuadraticInstance& inst, const Eigen::VectorXd& theta_k,
                                       const Eigen::VectorXd& eps_unlearn,
                                       const PartitionWeights& weights, double alpha);

/// Fast-slow update probe on a quadratic remaining loss centered at the
/// current iterate. simulated runs the real optimizer code path
/// (fast_step + inner_finetune); closed_form is beta (I - beta_r H)^k g;
/// inverse_hessian_ref is the beta^2 H^{-1} g reference the theory names.
struct FastSlowProbe {
    Eigen::VectorXd simulated;
    Eigen::VectorXd closed_form;
    Eigen::VectorXd inverse_hessian_ref;
    Eigen::VectorXd eigenvalues;      // of H, ascending
    Eigen::VectorXd damping_factors;  // (1 - beta_r mu)^k per eigenvalue
    std::vector<std::string> warnings;
};

FastSlowProbe fast_slow_update_probe(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& grad_task,
                                     double beta, double beta_remain, int k_inner);

/// Single-inner-step comparison against joint replay optimization:
///   replay = grad_task + grad_remain
///   ours   = (I - H) grad_task + grad_remain
///   residual = ours - replay + H grad_task   (identically zero)
struct ReplayDeltas {
    Eigen::VectorXd replay;
    Eigen::VectorXd ours;
    Eigen::VectorXd residual;
};

ReplayDeltas replay_delta_comparison(const Eigen::MatrixXd& hessian_remain,
                                     const Eigen::VectorXd& grad_task,
                                     const Eigen::VectorXd& grad_remain);

/// Instance constructors used by the checks (and by the test suites).
Eigen::MatrixXd random_spd(int dim, double eig_low, double eig_high, Rng& rng);

/// Shared-center family: remaining and learning parts share curvature and
/// center, so the steepest-descent identities are exact, not approximate.
QuadraticInstance shared_center_instance(int dim, Rng& rng);

/// Remain + unlearn family with an ill-conditioned remaining Hessian, used
/// for the remain-protection comparison.
QuadraticInstance unlearn_instance(int dim, Rng& rng);

struct CheckResult {
    std::string name;
    bool pass = false;
    double residual = 0.0;
    std::string note;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    bool all_pass() const;
};

/// The full oracle suite: steepest-descent brute-force agreement, corollary
/// reductions, fast-slow exactness and eigen-damping, the replay identity,
/// and the statistical remain-protection comparison.
VerificationReport run_verification(std::uint64_t seed);

}  // namespace clu
