#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clu/buffer.hpp"
#include "clu/model.hpp"

namespace clu {

/// Per-unlearn-target evaluation state carried across tasks.
struct TargetState {
    bool per_sample = false;
    std::vector<double> acc_history;        // class targets: accuracy per checkpoint
    std::vector<std::uint8_t> ever_hit;     // sample targets: 1 once predicted as its noisy label
    std::vector<double> mia_history;
};

/// Everything needed to continue a seed run bit-identically: model and
/// buffer state, evaluation histories, and the method wall-clock
/// accumulator. Dataset, plan and derived RNG streams are rebuilt
/// deterministically from the config and seed.
struct RunState {
    std::uint64_t seed = 0;
    std::uint32_t next_task = 0;
    double method_seconds = 0.0;
    ParamVector params;
    ReservoirBuffer::Snapshot buffer;
    std::vector<std::vector<double>> class_accuracy;  // per checkpoint, per class
    std::vector<TargetState> targets;
};

/// Binary checkpoint file: magic "CLUWCKPT", little-endian fields in the
/// order documented in checkpoint.cpp. Version 1.
void save_checkpoint(const RunState& state, const std::string& path);
RunState load_checkpoint(const std::string& path);

}  // namespace clu
