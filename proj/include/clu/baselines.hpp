#pragma once

#include <string>
#include <vector>

#include "clu/buffer.hpp"
#include "clu/model.hpp"
#include "clu/optimizer.hpp"
#include "clu/rng.hpp"
#include "clu/task.hpp"

namespace clu {

enum class BaselineMethod { JointRt, Ft, ErFt, Ga, NegGradPlus };

std::string to_string(BaselineMethod m);

struct BaselineConfig {
    BaselineMethod method = BaselineMethod::ErFt;
    double lr = 0.1;
    int steps = 50;    // per-task gradient steps
    int batch = 64;
    int epochs = 40;   // joint-oracle epochs
    double neggrad_balance = 0.5;        // ascent share for NegGrad+
    double oracle_min_accuracy = 0.95;   // warn below this train accuracy

    void validate() const;
};

/// Union of learn-task data minus everything later unlearned, over the tasks
/// [0, upto_task]. Pass tasks.size()-1 for the full-sequence remaining set.
Batch remaining_data(const TaskPlan& plan, std::size_t upto_task);

/// Retrain from scratch on the remaining data. Appends a warning when the
/// final train accuracy misses cfg.oracle_min_accuracy.
ParamVector train_joint_oracle(const Model& model, const Batch& remaining, const BaselineConfig& cfg,
                               Rng& rng, std::vector<std::string>* warnings = nullptr);

/// One task under a baseline method.
///
/// FT/ER learn tasks descend on task minibatches (ER mixes in buffer
/// replay); their unlearn tasks fine-tune on the already-erased buffer. GA
/// only supports unlearn tasks (plain ascent). NegGrad+ only supports
/// unlearn tasks (convex mix of buffer descent and unlearn ascent).
/// Unsupported pairings raise CapabilityError. The buffer is not mutated
/// here; the experiment loop owns buffer maintenance for baselines.
TaskRunResult run_baseline_task(BaselineMethod method, const Model& model, ParamVector params,
                                const TaskMaterial& task, ReservoirBuffer& buffer,
                                const BaselineConfig& cfg, Rng& rng);

}  // namespace clu
