#include "clu/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "clu/errors.hpp"

namespace clu {

namespace {

namespace tags {
constexpr std::uint64_t kDataset = 0x11;
constexpr std::uint64_t kSplit = 0x22;
constexpr std::uint64_t kInit = 0x33;
constexpr std::uint64_t kBuffer = 0x44;
constexpr std::uint64_t kTask = 0x55;
constexpr std::uint64_t kOracle = 0x66;
constexpr std::uint64_t kMia = 0x77;
constexpr std::uint64_t kConfusion = 0x88;
}  // namespace tags

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Dataset build_dataset(const DatasetConfig& cfg, Rng& rng) {
    switch (cfg.kind) {
        case DatasetConfig::Kind::Blobs: return make_blobs(cfg.blobs, rng);
        case DatasetConfig::Kind::Rings: return make_rings(cfg.rings, rng);
        case DatasetConfig::Kind::Csv: return load_csv(cfg.csv_path);
    }
    throw ValidationError("build_dataset: unknown dataset kind");
}

Batch merge_dedup(const Batch& a, const Batch& b) {
    std::unordered_set<std::int64_t> seen(a.ids.begin(), a.ids.end());
    std::vector<int> keep;
    for (int i = 0; i < b.size(); ++i)
        if (!seen.count(b.ids[static_cast<std::size_t>(i)])) keep.push_back(i);
    if (a.size() == 0) {
        Batch out = b;
        return out;
    }
    Batch extra;
    extra.features.resize(static_cast<Eigen::Index>(keep.size()), b.features.cols());
    extra.labels.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        extra.features.row(static_cast<Eigen::Index>(i)) = b.features.row(keep[i]);
        extra.labels[static_cast<Eigen::Index>(i)] = b.labels[keep[i]];
        extra.ids.push_back(b.ids[static_cast<std::size_t>(keep[i])]);
    }
    return concat_batches({a, extra});
}

Batch filter_by_label(const Batch& b, int label) {
    std::vector<int> rows;
    for (int i = 0; i < b.size(); ++i)
        if (b.labels[i] == label) rows.push_back(i);
    Batch out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), b.features.cols());
    out.labels.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = b.features.row(rows[i]);
        out.labels[static_cast<Eigen::Index>(i)] = b.labels[rows[i]];
        if (!b.ids.empty()) out.ids.push_back(b.ids[static_cast<std::size_t>(rows[i])]);
    }
    return out;
}

struct Probe {
    int start_task = -1;
    bool per_sample = false;
    Batch batch;
};

std::vector<Probe> collect_probes(const TaskPlan& plan) {
    std::vector<Probe> probes;
    for (std::size_t t = 0; t < plan.tasks.size(); ++t) {
        const TaskMaterial& task = plan.tasks[t];
        if (task.request.kind != TaskKind::Unlearn) continue;
        if (task.request.by_samples()) {
            Probe pr;
            pr.start_task = static_cast<int>(t);
            pr.per_sample = true;
            pr.batch = task.train;
            probes.push_back(std::move(pr));
        } else {
            for (int cls : task.request.classes) {
                Probe pr;
                pr.start_task = static_cast<int>(t);
                pr.per_sample = false;
                pr.batch = filter_by_label(task.train, cls);
                probes.push_back(std::move(pr));
            }
        }
    }
    return probes;
}

}  // namespace

MethodKind method_from_string(const std::string& name) {
    if (name == "ug_clu") return MethodKind::UgClu;
    if (name == "joint_rt") return MethodKind::JointRt;
    if (name == "ft") return MethodKind::Ft;
    if (name == "er_ft") return MethodKind::ErFt;
    if (name == "ga") return MethodKind::Ga;
    if (name == "neggrad_plus") return MethodKind::NegGradPlus;
    throw ValidationError("unknown method '" + name + "'");
}

std::string to_string(MethodKind m) {
    switch (m) {
        case MethodKind::UgClu: return "ug_clu";
        case MethodKind::JointRt: return "joint_rt";
        case MethodKind::Ft: return "ft";
        case MethodKind::ErFt: return "er_ft";
        case MethodKind::Ga: return "ga";
        case MethodKind::NegGradPlus: return "neggrad_plus";
    }
    return "?";
}

ExperimentConfig experiment_from_config(const ConfigMap& cfg) {
    ExperimentConfig out;

    const std::string kind = cfg.get_string("dataset.kind", "blobs");
    if (kind == "blobs") {
        out.dataset.kind = DatasetConfig::Kind::Blobs;
        out.dataset.blobs.classes = static_cast<int>(cfg.get_int("dataset.classes", 8));
        out.dataset.blobs.dim = static_cast<int>(cfg.get_int("dataset.dim", 8));
        out.dataset.blobs.per_class = static_cast<int>(cfg.get_int("dataset.per_class", 300));
        out.dataset.blobs.spread = cfg.get_double("dataset.spread", 0.35);
        out.dataset.blobs.radius = cfg.get_double("dataset.radius", 2.0);
    } else if (kind == "rings") {
        out.dataset.kind = DatasetConfig::Kind::Rings;
        out.dataset.rings.classes = static_cast<int>(cfg.get_int("dataset.classes", 3));
        out.dataset.rings.per_class = static_cast<int>(cfg.get_int("dataset.per_class", 300));
        out.dataset.rings.noise = cfg.get_double("dataset.noise", 0.08);
        out.dataset.rings.gap = cfg.get_double("dataset.gap", 1.0);
    } else if (kind == "csv") {
        out.dataset.kind = DatasetConfig::Kind::Csv;
        out.dataset.csv_path = cfg.get_string("dataset.path");
    } else {
        throw ValidationError("config: unknown dataset.kind '" + kind + "'");
    }
    out.dataset.test_fraction = cfg.get_double("dataset.test_fraction", 0.25);

    const std::string arch = cfg.get_string("model.arch", "mlp");
    if (arch == "mlp")
        out.arch = Architecture::Mlp;
    else if (arch == "tiny_conv")
        out.arch = Architecture::TinyConv;
    else
        throw ValidationError("config: unknown model.arch '" + arch + "'");
    if (cfg.has("model.hidden")) {
        out.hidden.clear();
        for (auto v : cfg.get_int_list("model.hidden")) out.hidden.push_back(static_cast<int>(v));
    }
    if (cfg.has("model.channels")) {
        out.channels.clear();
        for (auto v : cfg.get_int_list("model.channels")) out.channels.push_back(static_cast<int>(v));
    }
    const std::string act = cfg.get_string("model.activation", "relu");
    if (act == "relu")
        out.activation = Activation::Relu;
    else if (act == "tanh")
        out.activation = Activation::Tanh;
    else
        throw ValidationError("config: unknown model.activation '" + act + "'");

    out.sequence = cfg.get_string("run.sequence");
    const std::string protocol = cfg.get_string("run.protocol", "class_incremental");
    if (protocol == "class_incremental")
        out.protocol = Protocol::ClassIncremental;
    else if (protocol == "confusion")
        out.protocol = Protocol::Confusion;
    else
        throw ValidationError("config: unknown run.protocol '" + protocol + "'");
    out.confusion_fraction = cfg.get_double("confusion.fraction", 0.1);

    out.method = method_from_string(cfg.get_string("run.method", "ug_clu"));

    out.fast_slow.alpha = cfg.get_double("ug_clu.alpha", 1.0);
    out.fast_slow.beta_learn = cfg.get_double("ug_clu.beta_learn", 0.1);
    out.fast_slow.beta_unlearn = cfg.get_double("ug_clu.beta_unlearn", 0.05);
    out.fast_slow.beta_remain = cfg.get_double("ug_clu.beta_remain", 0.1);
    out.fast_slow.k_inner = static_cast<int>(cfg.get_int("ug_clu.k_inner", 1));
    out.fast_slow.k_outer = static_cast<int>(cfg.get_int("ug_clu.k_outer", 50));
    out.fast_slow.k_outer_unlearn = static_cast<int>(cfg.get_int("ug_clu.k_outer_unlearn", 0));
    out.fast_slow.task_batch = static_cast<int>(cfg.get_int("ug_clu.task_batch", 0));
    out.fast_slow.remain_batch = static_cast<int>(cfg.get_int("ug_clu.remain_batch", 64));
    out.schedule.lambda_learn = cfg.get_double("ug_clu.lambda_learn", 1.0);
    out.schedule.lambda_unlearn = cfg.get_double("ug_clu.lambda_unlearn", 1.0);
    out.saliency.gamma = cfg.get_double("ug_clu.gamma", 1.0);

    out.baseline.lr = cfg.get_double("baseline.lr", 0.1);
    out.baseline.steps = static_cast<int>(cfg.get_int("baseline.steps", 50));
    out.baseline.batch = static_cast<int>(cfg.get_int("baseline.batch", 64));
    out.baseline.epochs = static_cast<int>(cfg.get_int("baseline.epochs", 40));
    out.baseline.neggrad_balance = cfg.get_double("baseline.neggrad_balance", 0.5);

    out.buffer_capacity = static_cast<std::size_t>(cfg.get_int("run.buffer_capacity", 500));
    out.buffer_recount = cfg.get_bool("run.buffer_recount", false);
    out.seeds.clear();
    for (auto v : cfg.get_int_list("run.seeds")) out.seeds.push_back(static_cast<std::uint64_t>(v));
    if (out.seeds.empty()) throw ValidationError("config: run.seeds must be nonempty");
    out.out_dir = cfg.get_string("run.out", "");
    out.write_checkpoints = cfg.get_bool("run.checkpoints", false);

    out.eval.mia.use_max_prob = cfg.get_bool("eval.mia_use_max_prob", false);
    out.eval.mia.max_set_size = static_cast<int>(cfg.get_int("eval.mia_max_set", 256));
    out.eval.oracle_epochs = static_cast<int>(cfg.get_int("eval.oracle_epochs", 40));
    out.eval.oracle_lr = cfg.get_double("eval.oracle_lr", 0.1);
    out.eval.oracle_batch = static_cast<int>(cfg.get_int("eval.oracle_batch", 64));
    out.eval.oracle_min_accuracy = cfg.get_double("eval.oracle_min_accuracy", 0.9);
    return out;
}

namespace {

BaselineConfig oracle_config(const ExperimentConfig& cfg) {
    BaselineConfig oc = cfg.baseline;
    oc.epochs = cfg.eval.oracle_epochs;
    oc.lr = cfg.eval.oracle_lr;
    oc.batch = cfg.eval.oracle_batch;
    oc.oracle_min_accuracy = cfg.eval.oracle_min_accuracy;
    return oc;
}

std::vector<int> valid_classes_at(const TaskPlan& plan, int upto_task) {
    std::set<int> learned, unlearned;
    for (int t = 0; t <= upto_task; ++t) {
        const TaskRequest& req = plan.tasks[static_cast<std::size_t>(t)].request;
        if (req.by_samples()) continue;
        for (int c : req.classes)
            (req.kind == TaskKind::Learn ? learned : unlearned).insert(c);
    }
    std::vector<int> out;
    for (int c : learned)
        if (!unlearned.count(c)) out.push_back(c);
    return out;
}

AccuracyMatrix assemble_matrix(const TaskPlan& plan,
                               const std::vector<std::vector<double>>& class_accuracy) {
    std::vector<int> learn_tasks;
    for (std::size_t t = 0; t < plan.tasks.size(); ++t)
        if (plan.tasks[t].request.kind == TaskKind::Learn) learn_tasks.push_back(static_cast<int>(t));

    std::set<int> ever_unlearned;
    for (const TaskMaterial& task : plan.tasks)
        if (task.request.kind == TaskKind::Unlearn && !task.request.by_samples())
            ever_unlearned.insert(task.request.classes.begin(), task.request.classes.end());

    AccuracyMatrix m;
    const int rows = static_cast<int>(class_accuracy.size());
    const int cols = static_cast<int>(learn_tasks.size());
    m.a.setConstant(rows, cols, std::numeric_limits<double>::quiet_NaN());
    for (int j = 0; j < cols; ++j) {
        std::vector<int> valid;
        for (int c : plan.tasks[static_cast<std::size_t>(learn_tasks[static_cast<std::size_t>(j)])].request.classes)
            if (!ever_unlearned.count(c)) valid.push_back(c);
        if (valid.empty()) continue;
        for (int i = learn_tasks[static_cast<std::size_t>(j)]; i < rows; ++i) {
            double sum = 0.0;
            for (int c : valid) sum += class_accuracy[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
            m.a(i, j) = sum / static_cast<double>(valid.size());
        }
    }
    return m;
}

}  // namespace

SeedRunOutput run_single_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                              const std::string& resume_path, const std::string& out_dir) {
    Rng root(seed);
    Rng dataset_rng = root.fork(tags::kDataset);
    const Dataset dataset = build_dataset(cfg.dataset, dataset_rng);
    Rng split_rng = root.fork(tags::kSplit);
    const SplitDataset split = split_train_test(dataset, cfg.dataset.test_fraction, split_rng);

    const std::vector<TaskRequest> requests = parse_sequence(cfg.sequence);
    const TaskPlan plan =
        (cfg.protocol == Protocol::Confusion)
            ? build_confusion(split, requests,
                              ConfusionSpec{cfg.confusion_fraction, root.fork(tags::kConfusion).next_u64()},
                              true)
            : build_class_incremental(split, requests);

    ModelSpec spec;
    spec.architecture = cfg.arch;
    spec.input_dim = dataset.dim();
    spec.num_classes = dataset.num_classes;
    spec.layer_widths = cfg.hidden;
    spec.channel_widths = cfg.channels;
    spec.activation = cfg.activation;
    const Model model(spec);

    SeedRunOutput out;
    out.seed = seed;

    RunState st;
    ReservoirBuffer buffer(cfg.buffer_capacity, root.fork(tags::kBuffer), cfg.buffer_recount);
    if (resume_path.empty()) {
        st.seed = seed;
        st.next_task = 0;
        st.method_seconds = 0.0;
        Rng init_rng = root.fork(tags::kInit);
        st.params = model.init_params(init_rng);
    } else {
        st = load_checkpoint(resume_path);
        if (st.seed != seed)
            throw ValidationError("resume: checkpoint seed " + std::to_string(st.seed) +
                                  " does not match run seed " + std::to_string(seed));
        buffer = ReservoirBuffer::from_snapshot(st.buffer);
    }

    std::vector<Probe> probes = collect_probes(plan);
    // Map already-active probes to restored target states (ordered by task).
    std::vector<int> probe_state(probes.size(), -1);
    {
        int next_state = 0;
        for (std::size_t p = 0; p < probes.size(); ++p) {
            if (probes[p].start_task < static_cast<int>(st.next_task)) {
                if (next_state >= static_cast<int>(st.targets.size()))
                    throw ValidationError("resume: checkpoint target state does not match the plan");
                probe_state[p] = next_state++;
            }
        }
        if (!resume_path.empty() && next_state != static_cast<int>(st.targets.size()))
            throw ValidationError("resume: checkpoint target state does not match the plan");
    }

    std::string seed_dir;
    if (!out_dir.empty()) {
        seed_dir = out_dir + "/seed_" + std::to_string(seed);
        std::filesystem::create_directories(seed_dir);
        if (cfg.write_checkpoints) std::filesystem::create_directories(seed_dir + "/checkpoints");
    }

    ParamVector params = st.params;
    for (std::size_t t = st.next_task; t < plan.tasks.size(); ++t) {
        const TaskMaterial& planned = plan.tasks[t];
        TaskMaterial mat = planned;
        Rng task_rng = root.fork(tags::kTask).fork(t);

        const Clock::time_point t0 = Clock::now();
        if (mat.request.kind == TaskKind::Unlearn) {
            if (mat.request.by_samples()) {
                buffer.erase_ids(mat.request.sample_ids);
            } else {
                // Capture buffer-held samples of the target classes before
                // erasing, then unlearn on the union with the provided data.
                const Batch held = buffer.contents_of_classes(mat.request.classes);
                mat.train = merge_dedup(held, planned.train);
                buffer.erase_classes(mat.request.classes);
            }
        }

        switch (cfg.method) {
            case MethodKind::UgClu: {
                TaskRunResult res =
                    run_task(model, params, mat, buffer, cfg.fast_slow, cfg.schedule, cfg.saliency, task_rng);
                params = std::move(res.params);
                for (const IterationTrace& it : res.trace) out.traces.push_back({static_cast<int>(t), it});
                for (auto& w : res.warnings) out.warnings.push_back("task " + std::to_string(t) + ": " + w);
                break;
            }
            case MethodKind::JointRt: {
                const Batch remaining = remaining_data(plan, t);
                if (remaining.size() == 0) {
                    Rng reinit = task_rng.fork(1);
                    params = model.init_params(reinit);
                    out.warnings.push_back("task " + std::to_string(t) + ": empty remaining set, oracle reset");
                } else {
                    params = train_joint_oracle(model, remaining, oracle_config(cfg), task_rng, &out.warnings);
                }
                break;
            }
            default: {
                BaselineMethod bm;
                if (mat.request.kind == TaskKind::Learn) {
                    // GA / NegGrad+ are unlearning methods; learning tasks run
                    // the ER replay path (FT runs without replay).
                    bm = (cfg.method == MethodKind::Ft) ? BaselineMethod::Ft : BaselineMethod::ErFt;
                } else {
                    switch (cfg.method) {
                        case MethodKind::Ft: bm = BaselineMethod::Ft; break;
                        case MethodKind::ErFt: bm = BaselineMethod::ErFt; break;
                        case MethodKind::Ga: bm = BaselineMethod::Ga; break;
                        default: bm = BaselineMethod::NegGradPlus; break;
                    }
                }
                TaskRunResult res = run_baseline_task(bm, model, params, mat, buffer, cfg.baseline, task_rng);
                params = std::move(res.params);
                for (const IterationTrace& it : res.trace) out.traces.push_back({static_cast<int>(t), it});
                for (auto& w : res.warnings) out.warnings.push_back("task " + std::to_string(t) + ": " + w);
                if (mat.request.kind == TaskKind::Learn) buffer.observe_batch(mat.train);
                break;
            }
        }
        st.method_seconds += seconds_since(t0);

        // Activate probes for this task's unlearn targets.
        for (std::size_t p = 0; p < probes.size(); ++p) {
            if (probes[p].start_task != static_cast<int>(t)) continue;
            TargetState ts;
            ts.per_sample = probes[p].per_sample;
            if (ts.per_sample) ts.ever_hit.assign(static_cast<std::size_t>(probes[p].batch.size()), 0);
            probe_state[p] = static_cast<int>(st.targets.size());
            st.targets.push_back(std::move(ts));
        }

        // Evaluation (untimed): per-class accuracy row plus target probes.
        std::vector<double> row(static_cast<std::size_t>(dataset.num_classes), 0.0);
        for (int c = 0; c < dataset.num_classes; ++c)
            row[static_cast<std::size_t>(c)] =
                model.accuracy(params, plan.class_test[static_cast<std::size_t>(c)]);
        st.class_accuracy.push_back(std::move(row));

        for (std::size_t p = 0; p < probes.size(); ++p) {
            if (probe_state[p] < 0 || probes[p].start_task > static_cast<int>(t)) continue;
            TargetState& ts = st.targets[static_cast<std::size_t>(probe_state[p])];
            if (ts.per_sample) {
                const Eigen::VectorXi pred = model.predict(params, probes[p].batch);
                for (int i = 0; i < pred.size(); ++i)
                    if (pred[i] == probes[p].batch.labels[i]) ts.ever_hit[static_cast<std::size_t>(i)] = 1;
            } else {
                ts.acc_history.push_back(model.accuracy(params, probes[p].batch));
            }
            if (cfg.protocol == Protocol::ClassIncremental) {
                const Batch remain = remaining_data(plan, t);
                std::vector<Batch> test_parts;
                for (int c : valid_classes_at(plan, static_cast<int>(t)))
                    test_parts.push_back(plan.class_test[static_cast<std::size_t>(c)]);
                const Batch testset = concat_batches(test_parts);
                if (remain.size() > 0 && testset.size() > 0) {
                    Rng mia_rng = root.fork(tags::kMia).fork(t * 4096 + p);
                    ts.mia_history.push_back(
                        mia_attack(model, params, remain, testset, probes[p].batch, cfg.eval.mia, mia_rng)
                            .score);
                }
            }
        }

        if (cfg.write_checkpoints && !seed_dir.empty()) {
            st.params = params;
            st.buffer = buffer.snapshot();
            st.next_task = static_cast<std::uint32_t>(t + 1);
            char name[64];
            std::snprintf(name, sizeof(name), "/checkpoints/task_%03zu.ckpt", t);
            save_checkpoint(st, seed_dir + name);
        }
    }

    // Final metrics.
    out.matrix = assemble_matrix(plan, st.class_accuracy);
    MetricReport rep;
    rep.la = learning_accuracy(out.matrix);
    if (cfg.method != MethodKind::JointRt && out.matrix.tasks() >= 2) {
        try {
            rep.fm = forgetting_measure(out.matrix);
        } catch (const ValidationError&) {
            rep.fm.reset();
        }
    }

    if (!st.targets.empty()) {
        std::vector<double> highest;
        for (const TargetState& ts : st.targets) {
            if (ts.per_sample) {
                for (std::uint8_t hit : ts.ever_hit) highest.push_back(static_cast<double>(hit));
            } else {
                highest.push_back(*std::max_element(ts.acc_history.begin(), ts.acc_history.end()));
            }
        }
        double sum = 0.0;
        for (double v : highest) sum += v;
        rep.ua = sum / static_cast<double>(highest.size());

        std::vector<double> mia_values;
        for (const TargetState& ts : st.targets)
            if (!ts.mia_history.empty())
                mia_values.push_back(*std::max_element(ts.mia_history.begin(), ts.mia_history.end()));
        if (!mia_values.empty()) {
            double mia_sum = 0.0;
            for (double v : mia_values) mia_sum += v;
            rep.mia = mia_sum / static_cast<double>(mia_values.size());
        }
    }

    if (cfg.protocol == Protocol::Confusion && !plan.confusion.empty()) {
        std::vector<Batch> parts;
        for (const ConfusionSet& conf : plan.confusion) {
            Batch b = conf.noisy;
            b.labels = conf.true_labels;
            parts.push_back(std::move(b));
        }
        rep.ca = clean_accuracy(model, params, concat_batches(parts));
    }

    {
        Rng oracle_rng = root.fork(tags::kOracle);
        const Batch remaining = remaining_data(plan, plan.tasks.size() - 1);
        const ParamVector oracle = train_joint_oracle(model, remaining, oracle_config(cfg), oracle_rng,
                                                      &out.warnings);
        rep.kl = kl_to_oracle(model, params, oracle, split.train.as_batch());
    }
    rep.rte_seconds = st.method_seconds;
    out.report = rep;

    if (!seed_dir.empty()) {
        std::ofstream(seed_dir + "/metrics.json") << metrics_json(out.report);
        std::ofstream(seed_dir + "/accuracy_matrix.csv") << accuracy_matrix_csv(out.matrix);
        nlohmann::json timing;
        timing["rte_seconds"] = out.report.rte_seconds;
        timing["warnings"] = out.warnings;
        std::ofstream(seed_dir + "/timing.json") << timing.dump(2) << "\n";
        std::ofstream trace_out(seed_dir + "/trace.jsonl");
        for (const TraceRecord& tr : out.traces) {
            nlohmann::json j;
            j["task"] = tr.task;
            j["k"] = tr.iteration.k;
            j["task_loss"] = tr.iteration.task_loss;
            if (std::isnan(tr.iteration.buffer_loss))
                j["buffer_loss"] = nullptr;
            else
                j["buffer_loss"] = tr.iteration.buffer_loss;
            j["mask_density"] = tr.iteration.mask_density;
            j["coeff_mean"] = tr.iteration.coeff_mean;
            trace_out << j.dump() << "\n";
        }
    }
    return out;
}

namespace {

MetricStat stat_of(const std::vector<double>& values) {
    MetricStat s;
    s.n = static_cast<int>(values.size());
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / s.n;
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / s.n);
    return s;
}

template <typename Getter>
std::optional<MetricStat> aggregate_optional(const std::vector<SeedRunOutput>& runs, Getter get) {
    std::vector<double> values;
    for (const SeedRunOutput& r : runs) {
        const std::optional<double> v = get(r.report);
        if (v) values.push_back(*v);
    }
    if (values.empty()) return std::nullopt;
    return stat_of(values);
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    ExperimentOutput out;
    for (std::uint64_t seed : cfg.seeds)
        out.runs.push_back(run_single_seed(cfg, seed, "", cfg.out_dir));

    out.la = aggregate_optional(out.runs, [](const MetricReport& r) { return r.la; });
    out.fm = aggregate_optional(out.runs, [](const MetricReport& r) { return r.fm; });
    out.ua = aggregate_optional(out.runs, [](const MetricReport& r) { return r.ua; });
    out.mia = aggregate_optional(out.runs, [](const MetricReport& r) { return r.mia; });
    out.ca = aggregate_optional(out.runs, [](const MetricReport& r) { return r.ca; });
    {
        std::vector<double> kl, rte;
        for (const SeedRunOutput& r : out.runs) {
            kl.push_back(r.report.kl);
            rte.push_back(r.report.rte_seconds);
        }
        out.kl = stat_of(kl);
        out.rte = stat_of(rte);
    }

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream(cfg.out_dir + "/aggregate.json") << aggregate_json(out);
    }
    return out;
}

void sweep_gamma(const ExperimentConfig& cfg, const std::vector<double>& gammas,
                 const std::string& csv_path) {
    if (cfg.method != MethodKind::UgClu)
        throw ValidationError("sweep_gamma: only defined for method ug_clu");
    if (gammas.empty()) throw ValidationError("sweep_gamma: empty gamma list");

    std::ofstream csv(csv_path);
    if (!csv) throw ValidationError("sweep_gamma: cannot open " + csv_path);
    csv << "gamma,la_mean,la_std,fm_mean,fm_std,ua_mean,ua_std,mia_mean,mia_std,ca_mean,ca_std,"
           "kl_mean,kl_std\n";
    for (double gamma : gammas) {
        ExperimentConfig sub = cfg;
        sub.saliency.gamma = gamma;
        if (!cfg.out_dir.empty()) sub.out_dir = cfg.out_dir + "/gamma_" + format_double(gamma);
        const ExperimentOutput res = run_experiment(sub);
        auto cell = [&](const std::optional<MetricStat>& s) {
            return s ? format_double(s->mean) + "," + format_double(s->stddev) : std::string(",");
        };
        csv << format_double(gamma) << "," << cell(res.la) << "," << cell(res.fm) << ","
            << cell(res.ua) << "," << cell(res.mia) << "," << cell(res.ca) << ","
            << format_double(res.kl.mean) << "," << format_double(res.kl.stddev) << "\n";
    }
}

std::string metrics_json(const MetricReport& report) {
    nlohmann::json j;
    if (report.la) j["la"] = *report.la;
    if (report.fm) j["fm"] = *report.fm;
    if (report.ua) j["ua"] = *report.ua;
    if (report.mia) j["mia"] = *report.mia;
    if (report.ca) j["ca"] = *report.ca;
    j["kl"] = report.kl;
    return j.dump(2) + "\n";
}

std::string aggregate_json(const ExperimentOutput& out) {
    nlohmann::json j;
    auto put = [&](const char* name, const std::optional<MetricStat>& s) {
        if (!s) return;
        j[name] = {{"mean", s->mean}, {"std", s->stddev}, {"n", s->n}};
    };
    put("la", out.la);
    put("fm", out.fm);
    put("ua", out.ua);
    put("mia", out.mia);
    put("ca", out.ca);
    j["kl"] = {{"mean", out.kl.mean}, {"std", out.kl.stddev}, {"n", out.kl.n}};
    j["rte_seconds"] = {{"mean", out.rte.mean}, {"std", out.rte.stddev}, {"n", out.rte.n}};
    nlohmann::json seeds = nlohmann::json::array();
    for (const SeedRunOutput& r : out.runs) seeds.push_back(r.seed);
    j["seeds"] = seeds;
    return j.dump(2) + "\n";
}

std::string accuracy_matrix_csv(const AccuracyMatrix& matrix) {
    std::string out = "checkpoint";
    for (int j = 0; j < matrix.tasks(); ++j) out += ",task_" + std::to_string(j + 1);
    out += "\n";
    for (int i = 0; i < matrix.checkpoints(); ++i) {
        out += std::to_string(i + 1);
        for (int j = 0; j < matrix.tasks(); ++j) {
            out += ",";
            if (!std::isnan(matrix.a(i, j))) out += format_double(matrix.a(i, j));
        }
        out += "\n";
    }
    return out;
}

}  // namespace clu
