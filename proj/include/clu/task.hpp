#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clu/dataset.hpp"
#include "clu/model.hpp"
#include "clu/rng.hpp"

namespace clu {

enum class TaskKind { Learn, Unlearn };

/// One request in a CLU sequence. The payload is either a class-id list or a
/// sample-id list (task-agnostic random-subset unlearning).
struct TaskRequest {
    TaskKind kind = TaskKind::Learn;
    std::vector<int> classes;
    std::vector<std::int64_t> sample_ids;

    bool by_samples() const { return !sample_ids.empty(); }
};

/// Parse a sequence string such as "(+0,1),(+2,3),(-0,1)".
///
/// Grammar:
///   seq    := item ("," item)*
///   item   := "(" sign body ")"
///   sign   := "+" | "-"
///   body   := int ("," int)*            class payload
///           | "s:" int ("," int)*       sample-id payload, unlearn only
///
/// ASCII whitespace between tokens is ignored. Malformed text raises
/// ParseError with the byte offset; class bookkeeping violations (duplicate
/// class in a group, overlapping learn tasks, unlearning a class that is not
/// currently learned) raise ValidationError.
std::vector<TaskRequest> parse_sequence(const std::string& text);

std::string format_sequence(const std::vector<TaskRequest>& requests);

struct ConfusionSpec {
    double fraction = 0.1;
    std::uint64_t seed = 0;
};

/// Confusion subset of one learning task: the same feature rows carry a
/// shuffled (noisy) label in the training set; true labels are kept here for
/// evaluation only and are never shown to the learner.
struct ConfusionSet {
    int learn_task = -1;               // index into TaskPlan::tasks
    std::vector<std::int64_t> ids;
    Batch noisy;                        // features + shuffled labels
    Eigen::VectorXi true_labels;
};

/// A request materialized against a concrete dataset.
struct TaskMaterial {
    TaskRequest request;
    Batch train;  // Learn: task training data; Unlearn: the payload samples
};

struct TaskPlan {
    std::vector<TaskMaterial> tasks;
    std::vector<Batch> class_test;        // indexed by class id; held-out
    std::vector<ConfusionSet> confusion;  // confusion protocol only
    int num_classes = 0;
};

/// Class-incremental materialization: every learn task takes the full train
/// split of its classes, unlearn tasks take the train samples they target.
TaskPlan build_class_incremental(const SplitDataset& data,
                                 const std::vector<TaskRequest>& requests);

/// Interclass-confusion materialization: a seeded fraction of each learn
/// task's training data gets a shuffled label. When inject_unlearn is set, a
/// sample-id unlearn request for each task's confusion set is appended right
/// after that learn task (the sequence may instead carry explicit
/// "(-s:...)" items referencing ingested sample ids).
TaskPlan build_confusion(const SplitDataset& data, const std::vector<TaskRequest>& requests,
                         const ConfusionSpec& spec, bool inject_unlearn = true);

}  // namespace clu
