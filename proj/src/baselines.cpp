#include "clu/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "clu/errors.hpp"

namespace clu {

std::string to_string(BaselineMethod m) {
    switch (m) {
        case BaselineMethod::JointRt: return "joint_rt";
        case BaselineMethod::Ft: return "ft";
        case BaselineMethod::ErFt: return "er_ft";
        case BaselineMethod::Ga: return "ga";
        case BaselineMethod::NegGradPlus: return "neggrad_plus";
    }
    return "?";
}

void BaselineConfig::validate() const {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("BaselineConfig: lr must be positive");
    if (steps < 1 || batch < 1 || epochs < 1)
        throw ValidationError("BaselineConfig: steps, batch and epochs must be positive");
    if (neggrad_balance < 0.0 || neggrad_balance > 1.0)
        throw ValidationError("BaselineConfig: neggrad_balance must be in [0,1]");
}

Batch remaining_data(const TaskPlan& plan, std::size_t upto_task) {
    if (upto_task >= plan.tasks.size())
        throw ValidationError("remaining_data: task index out of range");
    std::unordered_set<std::int64_t> unlearned_ids;
    std::unordered_set<int> unlearned_classes;
    for (std::size_t t = 0; t <= upto_task; ++t) {
        const TaskMaterial& task = plan.tasks[t];
        if (task.request.kind != TaskKind::Unlearn) continue;
        if (task.request.by_samples())
            unlearned_ids.insert(task.request.sample_ids.begin(), task.request.sample_ids.end());
        else
            unlearned_classes.insert(task.request.classes.begin(), task.request.classes.end());
    }

    std::vector<Batch> parts;
    for (std::size_t t = 0; t <= upto_task; ++t) {
        const TaskMaterial& task = plan.tasks[t];
        if (task.request.kind != TaskKind::Learn) continue;
        std::vector<int> keep;
        for (int i = 0; i < task.train.size(); ++i) {
            const std::int64_t id = task.train.ids[static_cast<std::size_t>(i)];
            if (unlearned_ids.count(id)) continue;
            if (unlearned_classes.count(task.train.labels[i])) continue;
            keep.push_back(i);
        }
        if (keep.empty()) continue;
        Batch b;
        b.features.resize(static_cast<Eigen::Index>(keep.size()), task.train.features.cols());
        b.labels.resize(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i) {
            b.features.row(static_cast<Eigen::Index>(i)) = task.train.features.row(keep[i]);
            b.labels[static_cast<Eigen::Index>(i)] = task.train.labels[keep[i]];
            b.ids.push_back(task.train.ids[static_cast<std::size_t>(keep[i])]);
        }
        parts.push_back(std::move(b));
    }
    return concat_batches(parts);
}

namespace {

Batch minibatch(const Batch& full, int batch_size, Rng& rng) {
    if (batch_size >= full.size()) return full;
    const auto rows = rng.sample_without_replacement(static_cast<std::size_t>(full.size()),
                                                     static_cast<std::size_t>(batch_size));
    Batch b;
    b.features.resize(batch_size, full.features.cols());
    b.labels.resize(batch_size);
    b.ids.reserve(static_cast<std::size_t>(batch_size));
    for (int i = 0; i < batch_size; ++i) {
        b.features.row(i) = full.features.row(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]));
        b.labels[i] = full.labels[static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)])];
        if (!full.ids.empty()) b.ids.push_back(full.ids[rows[static_cast<std::size_t>(i)]]);
    }
    return b;
}

ParamVector mean_grad(const Model& model, const ParamVector& params, const Batch& batch) {
    return model.weighted_grad(params, batch, SampleWeights::Constant(batch.size(), 1.0 / batch.size()));
}

}  // namespace

ParamVector train_joint_oracle(const Model& model, const Batch& remaining, const BaselineConfig& cfg,
                               Rng& rng, std::vector<std::string>* warnings) {
    cfg.validate();
    if (remaining.size() == 0)
        throw ValidationError("train_joint_oracle: remaining set is empty; no oracle exists");
    ParamVector params = model.init_params(rng);
    const int n = remaining.size();
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (int at = 0; at < n; at += cfg.batch) {
            const int len = std::min(cfg.batch, n - at);
            Batch b;
            b.features.resize(len, remaining.features.cols());
            b.labels.resize(len);
            for (int i = 0; i < len; ++i) {
                b.features.row(i) = remaining.features.row(static_cast<Eigen::Index>(order[static_cast<std::size_t>(at + i)]));
                b.labels[i] = remaining.labels[static_cast<Eigen::Index>(order[static_cast<std::size_t>(at + i)])];
            }
            params -= cfg.lr * mean_grad(model, params, b);
        }
    }
    const double train_acc = model.accuracy(params, remaining);
    if (train_acc < cfg.oracle_min_accuracy && warnings)
        warnings->push_back("joint oracle train accuracy " + std::to_string(train_acc) +
                            " below threshold " + std::to_string(cfg.oracle_min_accuracy));
    return params;
}

TaskRunResult run_baseline_task(BaselineMethod method, const Model& model, ParamVector params,
                                const TaskMaterial& task, ReservoirBuffer& buffer,
                                const BaselineConfig& cfg, Rng& rng) {
    cfg.validate();
    const TaskKind kind = task.request.kind;
    if (method == BaselineMethod::JointRt)
        throw CapabilityError("joint_rt retrains from scratch; it has no per-task update");
    if (kind == TaskKind::Learn && (method == BaselineMethod::Ga || method == BaselineMethod::NegGradPlus))
        throw CapabilityError(to_string(method) + " is an unlearning method and rejects learn tasks");
    if (task.train.size() == 0) throw ValidationError("run_baseline_task: task has no data");

    TaskRunResult result;
    for (int step = 1; step <= cfg.steps; ++step) {
        IterationTrace tr;
        tr.k = step;
        tr.mask_density = 1.0;
        tr.coeff_mean = 1.0;
        tr.buffer_loss = std::numeric_limits<double>::quiet_NaN();

        if (kind == TaskKind::Learn) {
            const Batch tb = minibatch(task.train, cfg.batch, rng);
            tr.task_loss = model.mean_loss(params, tb);
            ParamVector grad = mean_grad(model, params, tb);
            if (method == BaselineMethod::ErFt && !buffer.empty()) {
                const Batch rb = buffer.sample_batch(std::min<std::size_t>(
                    static_cast<std::size_t>(cfg.batch), buffer.size()));
                tr.buffer_loss = model.mean_loss(params, rb);
                grad = 0.5 * (grad + mean_grad(model, params, rb));
            }
            params -= cfg.lr * grad;
        } else if (method == BaselineMethod::Ga) {
            const Batch ub = minibatch(task.train, cfg.batch, rng);
            tr.task_loss = model.mean_loss(params, ub);
            params += cfg.lr * mean_grad(model, params, ub);
        } else if (method == BaselineMethod::NegGradPlus) {
            const Batch ub = minibatch(task.train, cfg.batch, rng);
            tr.task_loss = model.mean_loss(params, ub);
            ParamVector grad = -cfg.neggrad_balance * mean_grad(model, params, ub);
            if (!buffer.empty()) {
                const Batch rb = buffer.sample_batch(std::min<std::size_t>(
                    static_cast<std::size_t>(cfg.batch), buffer.size()));
                tr.buffer_loss = model.mean_loss(params, rb);
                grad += (1.0 - cfg.neggrad_balance) * mean_grad(model, params, rb);
            } else if (step == 1) {
                result.warnings.push_back("neggrad+: empty buffer, descent term skipped");
            }
            params -= cfg.lr * grad;
        } else {
            // FT / ER on an unlearn task: fine-tune on the retained buffer.
            if (buffer.empty()) {
                if (step == 1) result.warnings.push_back("unlearn fine-tune skipped: buffer empty");
                tr.task_loss = model.mean_loss(params, task.train);
                result.trace.push_back(tr);
                continue;
            }
            const Batch rb = buffer.sample_batch(std::min<std::size_t>(
                static_cast<std::size_t>(cfg.batch), buffer.size()));
            tr.task_loss = model.mean_loss(params, task.train);
            tr.buffer_loss = model.mean_loss(params, rb);
            params -= cfg.lr * mean_grad(model, params, rb);
        }
        result.trace.push_back(tr);
    }
    result.params = std::move(params);
    return result;
}

}  // namespace clu
