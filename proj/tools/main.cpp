#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clu/baselines.hpp"
#include "clu/config.hpp"
#include "clu/errors.hpp"
#include "clu/experiment.hpp"
#include "clu/verify.hpp"

namespace {

clu::ExperimentConfig load_config(const std::string& path, std::uint64_t seed_override,
                                  bool has_seed, const std::string& out_override) {
    clu::ExperimentConfig cfg = clu::experiment_from_config(clu::ConfigMap::parse_file(path));
    if (has_seed) cfg.seeds = {seed_override};
    if (!out_override.empty()) cfg.out_dir = out_override;
    return cfg;
}

nlohmann::json verification_to_json(const clu::VerificationReport& report) {
    nlohmann::json j;
    nlohmann::json checks = nlohmann::json::array();
    for (const clu::CheckResult& c : report.checks) {
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"residual", c.residual}, {"note", c.note}});
    }
    j["checks"] = checks;
    j["all_pass"] = report.all_pass();
    return j;
}

void print_metric_line(const char* name, const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) return;
    const auto& v = j[key];
    if (v.is_object())
        std::printf("  %-4s %.4f +/- %.4f (n=%d)\n", name, v["mean"].get<double>(),
                    v["std"].get<double>(), v["n"].get<int>());
    else
        std::printf("  %-4s %.4f\n", name, v.get<double>());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continual learning-unlearning workbench"};
    app.require_subcommand(1);

    std::string config_path, out_dir, resume_path, metrics_path, suite = "props";
    std::uint64_t seed = 0;
    std::uint64_t verify_seed = 7;
    bool has_seed = false;
    std::vector<double> gammas;

    auto add_seed_opt = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "override the config seed list with one seed")
            ->each([&](const std::string&) { has_seed = true; });
    };

    CLI::App* run_cmd = app.add_subcommand("run", "run the configured experiment over all seeds");
    run_cmd->add_option("--config", config_path, "experiment config file")->required();
    add_seed_opt(run_cmd);
    run_cmd->add_option("--out", out_dir, "output directory (overrides config)");
    run_cmd->add_option("--resume", resume_path, "checkpoint file to continue from (single seed)");

    CLI::App* sweep_cmd = app.add_subcommand("sweep-gamma", "run one experiment per saliency threshold");
    sweep_cmd->add_option("--config", config_path, "experiment config file")->required();
    sweep_cmd->add_option("--gammas", gammas, "gamma values")->required()->delimiter(',');
    add_seed_opt(sweep_cmd);
    sweep_cmd->add_option("--out", out_dir, "output directory (overrides config)");

    CLI::App* verify_cmd = app.add_subcommand("verify", "run the numerical theory oracles");
    verify_cmd->add_option("--suite", suite, "props | all");
    verify_cmd->add_option("--seed", verify_seed, "oracle RNG seed");
    verify_cmd->add_option("--out", out_dir, "write the JSON report to this file");

    CLI::App* oracle_cmd = app.add_subcommand("oracle", "train the joint retraining oracle");
    oracle_cmd->add_option("--config", config_path, "experiment config file")->required();
    add_seed_opt(oracle_cmd);
    oracle_cmd->add_option("--out", out_dir, "parameter output file (JSON)");

    CLI::App* report_cmd = app.add_subcommand("report", "pretty-print a metrics or aggregate JSON file");
    report_cmd->add_option("--metrics", metrics_path, "metrics.json or aggregate.json")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            clu::ExperimentConfig cfg = load_config(config_path, seed, has_seed, out_dir);
            if (!resume_path.empty()) {
                if (cfg.seeds.size() != 1)
                    throw clu::ValidationError("--resume requires a single seed (use --seed)");
                const clu::SeedRunOutput out =
                    clu::run_single_seed(cfg, cfg.seeds.front(), resume_path, cfg.out_dir);
                std::cout << clu::metrics_json(out.report);
                return 0;
            }
            const clu::ExperimentOutput out = clu::run_experiment(cfg);
            std::cout << clu::aggregate_json(out);
            return 0;
        }
        if (sweep_cmd->parsed()) {
            clu::ExperimentConfig cfg = load_config(config_path, seed, has_seed, out_dir);
            if (cfg.out_dir.empty())
                throw clu::ValidationError("sweep-gamma needs an output directory (config run.out or --out)");
            std::filesystem::create_directories(cfg.out_dir);
            const std::string csv = cfg.out_dir + "/gamma_sweep.csv";
            clu::sweep_gamma(cfg, gammas, csv);
            std::cout << "wrote " << csv << "\n";
            return 0;
        }
        if (verify_cmd->parsed()) {
            if (suite != "props" && suite != "all")
                throw clu::ValidationError("unknown verify suite '" + suite + "' (props | all)");
            const clu::VerificationReport report = clu::run_verification(verify_seed);
            const nlohmann::json j = verification_to_json(report);
            if (!out_dir.empty())
                std::ofstream(out_dir) << j.dump(2) << "\n";
            for (const clu::CheckResult& c : report.checks)
                std::printf("[%s] %-32s residual=%.3e %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                            c.residual, c.note.c_str());
            return report.all_pass() ? 0 : 1;
        }
        if (oracle_cmd->parsed()) {
            clu::ExperimentConfig cfg = load_config(config_path, seed, has_seed, "");
            const std::uint64_t s = cfg.seeds.front();
            clu::Rng root(s);
            clu::Rng data_rng = root.fork(0x11);
            clu::Dataset dataset = [&] {
                switch (cfg.dataset.kind) {
                    case clu::DatasetConfig::Kind::Blobs: return clu::make_blobs(cfg.dataset.blobs, data_rng);
                    case clu::DatasetConfig::Kind::Rings: return clu::make_rings(cfg.dataset.rings, data_rng);
                    default: return clu::load_csv(cfg.dataset.csv_path);
                }
            }();
            clu::Rng split_rng = root.fork(0x22);
            const clu::SplitDataset split =
                clu::split_train_test(dataset, cfg.dataset.test_fraction, split_rng);
            const clu::TaskPlan plan =
                clu::build_class_incremental(split, clu::parse_sequence(cfg.sequence));
            clu::ModelSpec spec;
            spec.architecture = cfg.arch;
            spec.input_dim = dataset.dim();
            spec.num_classes = dataset.num_classes;
            spec.layer_widths = cfg.hidden;
            spec.channel_widths = cfg.channels;
            spec.activation = cfg.activation;
            const clu::Model model(spec);
            clu::BaselineConfig oc = cfg.baseline;
            oc.epochs = cfg.eval.oracle_epochs;
            oc.lr = cfg.eval.oracle_lr;
            oc.batch = cfg.eval.oracle_batch;
            std::vector<std::string> warnings;
            clu::Rng oracle_rng = root.fork(0x66);
            const clu::ParamVector params = clu::train_joint_oracle(
                model, clu::remaining_data(plan, plan.tasks.size() - 1), oc, oracle_rng, &warnings);
            nlohmann::json j;
            j["param_count"] = params.size();
            j["seed"] = s;
            j["values"] = std::vector<double>(params.data(), params.data() + params.size());
            j["warnings"] = warnings;
            const std::string path = out_dir.empty() ? "oracle_params.json" : out_dir;
            std::ofstream(path) << j.dump() << "\n";
            std::cout << "wrote " << path << " (" << params.size() << " parameters)\n";
            return 0;
        }
        if (report_cmd->parsed()) {
            std::ifstream in(metrics_path);
            if (!in) throw clu::ValidationError("cannot open " + metrics_path);
            nlohmann::json j;
            in >> j;
            std::printf("%s\n", metrics_path.c_str());
            print_metric_line("LA", j, "la");
            print_metric_line("FM", j, "fm");
            print_metric_line("UA", j, "ua");
            print_metric_line("MIA", j, "mia");
            print_metric_line("CA", j, "ca");
            print_metric_line("KL", j, "kl");
            print_metric_line("RTE", j, "rte_seconds");
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
