#include "clu/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clu/errors.hpp"

namespace clu {

void FastSlowConfig::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("FastSlowConfig: alpha must be positive");
    if (!(beta_learn > 0.0) || !(beta_unlearn > 0.0) || !(beta_remain > 0.0))
        throw ValidationError("FastSlowConfig: step sizes must be positive");
    if (k_inner < 0 || k_outer < 1)
        throw ValidationError("FastSlowConfig: k_inner must be >= 0 and k_outer >= 1");
    if (remain_batch < 1) throw ValidationError("FastSlowConfig: remain_batch must be positive");
}

namespace {

Eigen::VectorXd inverse_loss_share(const Eigen::VectorXd& losses, double lambda, double floor) {
    Eigen::VectorXd inv(losses.size());
    for (Eigen::Index i = 0; i < losses.size(); ++i) {
        const double l = std::max(losses[i], floor);
        inv[i] = std::pow(l, -lambda);
    }
    const double total = inv.sum();
    return inv * (static_cast<double>(losses.size()) / total);
}

}  // namespace

Eigen::VectorXd adaptive_coeffs_learn(const Eigen::VectorXd& losses, int k, int K,
                                      const CoefficientSchedule& sched) {
    if (losses.size() == 0) throw ValidationError("adaptive_coeffs_learn: empty loss vector");
    if (k < 0 || K < 1 || k > K) throw ValidationError("adaptive_coeffs_learn: need 0 <= k <= K");
    const Eigen::VectorXd share = inverse_loss_share(losses, sched.lambda_learn, sched.epsilon_floor);
    const double ramp = static_cast<double>(k) / K;
    return (ramp * share).cwiseMin(1.0);
}

Eigen::VectorXd adaptive_coeffs_unlearn(const Eigen::VectorXd& losses, int k, int K,
                                        const CoefficientSchedule& sched) {
    if (losses.size() == 0) throw ValidationError("adaptive_coeffs_unlearn: empty loss vector");
    if (k < 0 || K < 1 || k > K) throw ValidationError("adaptive_coeffs_unlearn: need 0 <= k <= K");
    const Eigen::VectorXd share = inverse_loss_share(losses, sched.lambda_unlearn, sched.epsilon_floor);
    const double ramp = 1.0 - static_cast<double>(k) / K;
    return ramp * share;
}

SaliencyMask saliency_mask(const Eigen::VectorXd& grad_task_abs,
                           const Eigen::VectorXd& grad_remain0_abs, const SaliencyConfig& cfg) {
    if (grad_task_abs.size() != grad_remain0_abs.size())
        throw ShapeError("saliency_mask: magnitude vectors differ in length");
    SaliencyMask mask(grad_task_abs.size());
    for (Eigen::Index j = 0; j < mask.size(); ++j) {
        const double denom = std::max(grad_remain0_abs[j], cfg.ratio_floor);
        mask[j] = (grad_task_abs[j] / denom >= cfg.gamma) ? 1.0 : 0.0;
    }
    return mask;
}

ParamVector fast_step(const Model& model, const ParamVector& params, const Batch& task_batch,
                      const Eigen::VectorXd& coeffs, const SaliencyMask& mask, double beta,
                      TaskKind direction) {
    if (coeffs.size() != task_batch.size())
        throw ShapeError("fast_step: coefficient count does not match batch size");
    if (mask.size() != params.size()) throw ShapeError("fast_step: mask length does not match params");
    const double inv_n = 1.0 / task_batch.size();
    SampleWeights weights = (direction == TaskKind::Learn)
                                ? SampleWeights((1.0 - coeffs.array()) * inv_n)
                                : SampleWeights(-coeffs.array() * inv_n);
    const ParamVector grad = model.weighted_grad(params, task_batch, weights);
    return params - beta * mask.cwiseProduct(grad);
}

ParamVector inner_finetune(const Model& model, const ParamVector& theta_q, ReservoirBuffer& buffer,
                           double beta_remain, int k_inner, int batch_size) {
    ParamVector theta = theta_q;
    if (buffer.empty()) return theta;
    for (int step = 0; step < k_inner; ++step) {
        const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(batch_size), buffer.size());
        const Batch batch = buffer.sample_batch(n);
        const SampleWeights weights = SampleWeights::Constant(batch.size(), 1.0 / batch.size());
        theta -= beta_remain * model.weighted_grad(theta, batch, weights);
    }
    return theta;
}

ParamVector slow_step(const ParamVector& theta_k, const ParamVector& theta_r, double alpha) {
    if (theta_k.size() != theta_r.size()) throw ShapeError("slow_step: parameter lengths differ");
    return theta_k - alpha * (theta_k - theta_r);
}

namespace {

/// Mean-gradient magnitude over the buffer contents (chunked full pass).
Eigen::VectorXd remain_gradient_magnitude(const Model& model, const ParamVector& params,
                                          const ReservoirBuffer& buffer, int probe_cap) {
    ParamVector grad = ParamVector::Zero(params.size());
    const auto& items = buffer.items();
    const std::size_t total = items.size();
    std::size_t at = 0;
    while (at < total) {
        const std::size_t chunk = std::min<std::size_t>(static_cast<std::size_t>(probe_cap), total - at);
        Batch b;
        b.features.resize(static_cast<Eigen::Index>(chunk), items.front().features.size());
        b.labels.resize(static_cast<Eigen::Index>(chunk));
        for (std::size_t i = 0; i < chunk; ++i) {
            b.features.row(static_cast<Eigen::Index>(i)) = items[at + i].features;
            b.labels[static_cast<Eigen::Index>(i)] = items[at + i].label;
        }
        grad += model.weighted_grad(params, b, SampleWeights::Constant(b.size(), 1.0 / static_cast<double>(total)));
        at += chunk;
    }
    return grad.cwiseAbs();
}

Batch sample_task_batch(const Batch& full, int task_batch, Rng& rng) {
    if (task_batch <= 0 || task_batch >= full.size()) return full;
    const std::vector<std::size_t> rows =
        rng.sample_without_replacement(static_cast<std::size_t>(full.size()),
                                       static_cast<std::size_t>(task_batch));
    Batch b;
    b.features.resize(task_batch, full.features.cols());
    b.labels.resize(task_batch);
    b.ids.reserve(static_cast<std::size_t>(task_batch));
    for (int i = 0; i < task_batch; ++i) {
        b.features.row(i) = full.features.row(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]));
        b.labels[i] = full.labels[static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)])];
        if (!full.ids.empty()) b.ids.push_back(full.ids[rows[static_cast<std::size_t>(i)]]);
    }
    return b;
}

}  // namespace

TaskRunResult run_task(const Model& model, ParamVector params, const TaskMaterial& task,
                       ReservoirBuffer& buffer, const FastSlowConfig& fs,
                       const CoefficientSchedule& sched, const SaliencyConfig& sal, Rng& rng) {
    fs.validate();
    if (task.train.size() == 0) throw ValidationError("run_task: task has no data");

    TaskRunResult result;
    const TaskKind kind = task.request.kind;
    const Batch batch = sample_task_batch(task.train, fs.task_batch, rng);
    const double beta = (kind == TaskKind::Learn) ? fs.beta_learn : fs.beta_unlearn;
    const int outer = fs.outer_iters(kind);

    Eigen::VectorXd remain0_abs;
    if (buffer.empty()) {
        result.warnings.push_back("buffer empty: inner loop skipped, saliency probe is zero");
        remain0_abs = Eigen::VectorXd::Zero(params.size());
    } else {
        remain0_abs = remain_gradient_magnitude(model, params, buffer, fs.remain_probe_cap);
    }

    for (int k = 1; k <= outer; ++k) {
        const Eigen::VectorXd losses = model.per_sample_loss(params, batch);
        // Coefficients are indexed by the state being weighted (k-1, starting
        // at the boundary value for the initial model).
        const Eigen::VectorXd coeffs = (kind == TaskKind::Learn)
                                           ? adaptive_coeffs_learn(losses, k - 1, outer, sched)
                                           : adaptive_coeffs_unlearn(losses, k - 1, outer, sched);

        const double inv_n = 1.0 / batch.size();
        const SampleWeights weights = (kind == TaskKind::Learn)
                                          ? SampleWeights((1.0 - coeffs.array()) * inv_n)
                                          : SampleWeights(-coeffs.array() * inv_n);
        const Eigen::VectorXd task_grad_abs = model.weighted_grad(params, batch, weights).cwiseAbs();
        const SaliencyMask mask = saliency_mask(task_grad_abs, remain0_abs, sal);

        const ParamVector theta_q = fast_step(model, params, batch, coeffs, mask, beta, kind);
        const ParamVector theta_r = inner_finetune(model, theta_q, buffer, fs.beta_remain, fs.k_inner,
                                                   fs.remain_batch);
        params = slow_step(params, theta_r, fs.alpha);

        IterationTrace tr;
        tr.k = k;
        tr.task_loss = losses.mean();
        tr.buffer_loss = std::numeric_limits<double>::quiet_NaN();
        if (!buffer.empty()) {
            const auto& items = buffer.items();
            const std::size_t probe = std::min<std::size_t>(items.size(),
                                                            static_cast<std::size_t>(fs.remain_probe_cap));
            Batch pb;
            pb.features.resize(static_cast<Eigen::Index>(probe), items.front().features.size());
            pb.labels.resize(static_cast<Eigen::Index>(probe));
            for (std::size_t i = 0; i < probe; ++i) {
                pb.features.row(static_cast<Eigen::Index>(i)) = items[i].features;
                pb.labels[static_cast<Eigen::Index>(i)] = items[i].label;
            }
            tr.buffer_loss = model.mean_loss(params, pb);
        }
        tr.mask_density = mask.mean();
        tr.coeff_mean = coeffs.mean();
        result.trace.push_back(tr);
    }

    if (kind == TaskKind::Learn) buffer.observe_batch(batch);

    result.params = std::move(params);
    return result;
}

}  // namespace clu
