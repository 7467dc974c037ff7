#pragma once

#include <optional>
#include <string>
#include <vector>

#include "clu/baselines.hpp"
#include "clu/checkpoint.hpp"
#include "clu/config.hpp"
#include "clu/dataset.hpp"
#include "clu/metrics.hpp"
#include "clu/model.hpp"
#include "clu/optimizer.hpp"
#include "clu/task.hpp"

namespace clu {

/// Sequence-level method selection. GA and NegGrad+ are unlearning methods;
/// their learn tasks run the ER replay-descent path.
enum class MethodKind { UgClu, JointRt, Ft, ErFt, Ga, NegGradPlus };

MethodKind method_from_string(const std::string& name);
std::string to_string(MethodKind m);

enum class Protocol { ClassIncremental, Confusion };

struct DatasetConfig {
    enum class Kind { Blobs, Rings, Csv } kind = Kind::Blobs;
    BlobsConfig blobs;
    RingsConfig rings;
    std::string csv_path;
    double test_fraction = 0.25;
};

struct EvalConfig {
    MiaConfig mia;
    int oracle_epochs = 40;
    double oracle_lr = 0.1;
    int oracle_batch = 64;
    double oracle_min_accuracy = 0.9;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    Architecture arch = Architecture::Mlp;
    std::vector<int> hidden = {32};
    std::vector<int> channels = {4};
    Activation activation = Activation::Relu;

    std::string sequence;
    Protocol protocol = Protocol::ClassIncremental;
    double confusion_fraction = 0.1;

    MethodKind method = MethodKind::UgClu;
    FastSlowConfig fast_slow;
    CoefficientSchedule schedule;
    SaliencyConfig saliency;
    BaselineConfig baseline;

    std::size_t buffer_capacity = 500;
    bool buffer_recount = false;

    std::vector<std::uint64_t> seeds = {1};
    std::string out_dir;
    bool write_checkpoints = false;

    EvalConfig eval;
};

/// Build an ExperimentConfig from a parsed config file (grammar in README).
ExperimentConfig experiment_from_config(const ConfigMap& cfg);

struct TraceRecord {
    int task = 0;
    IterationTrace iteration;
};

struct SeedRunOutput {
    std::uint64_t seed = 0;
    MetricReport report;
    AccuracyMatrix matrix;
    std::vector<TraceRecord> traces;
    std::vector<std::string> warnings;
};

/// One seed of the configured experiment. When out_dir is nonempty the run
/// writes metrics.json, accuracy_matrix.csv, trace.jsonl, timing.json and
/// (if enabled) per-task checkpoints under out_dir/seed_<seed>/. A nonempty
/// resume_path continues from a saved checkpoint.
SeedRunOutput run_single_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                              const std::string& resume_path = "", const std::string& out_dir = "");

struct MetricStat {
    double mean = 0.0;
    double stddev = 0.0;
    int n = 0;
};

struct ExperimentOutput {
    std::vector<SeedRunOutput> runs;
    std::optional<MetricStat> la, fm, ua, mia, ca;
    MetricStat kl;
    MetricStat rte;
};

/// All configured seeds; aggregates are mean +/- standard deviation over
/// the seeds where a metric is defined. Writes aggregate.json when the
/// config names an output directory.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

/// One full experiment per gamma with shared seeds; rows land in a CSV.
void sweep_gamma(const ExperimentConfig& cfg, const std::vector<double>& gammas,
                 const std::string& csv_path);

/// Deterministic JSON for a metric report (RTE excluded; it goes to
/// timing.json) and for aggregates.
std::string metrics_json(const MetricReport& report);
std::string aggregate_json(const ExperimentOutput& out);
std::string accuracy_matrix_csv(const AccuracyMatrix& matrix);

}  // namespace clu
