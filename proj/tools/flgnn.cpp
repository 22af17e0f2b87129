// flgnn: command-line front end for the federated graph-attention simulator.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flgnn/error.hpp"
#include "flgnn/experiment/config.hpp"
#include "flgnn/experiment/manifest.hpp"
#include "flgnn/experiment/report.hpp"
#include "flgnn/experiment/runner.hpp"
#include "flgnn/federation/runner.hpp"
#include "flgnn/gat/checkpoint.hpp"
#include "flgnn/graph/io.hpp"

namespace fs = std::filesystem;
using namespace flgnn;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kDivergence = 3, kPartialFailure = 4, kOtherError = 1 };

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::size_t jobs = 1;
  std::vector<std::string> variants;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config = true) {
  auto* opt = cmd->add_option("--config", args.config, "experiment configuration (JSON)");
  if (needs_config) opt->required();
  cmd->add_option("--seed", args.seed, "master seed (overrides the config)");
  cmd->add_option("--out", args.out, "output directory")->capture_default_str();
  cmd->add_option("--jobs", args.jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--variant", args.variants, "variants to run (comma separated)")->delimiter(',');
}

experiment::ExperimentConfig load(const CommonArgs& args) {
  std::ifstream in(args.config);
  if (!in) throw ConfigError({"cannot read config file " + args.config});
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError({args.config + ": " + e.what()});
  }
  if (args.seed) doc["seed"] = *args.seed;
  return experiment::parse_config(doc, fs::path(args.config).parent_path());
}

nlohmann::json manifest_fields(const std::string& verb, const experiment::ExperimentConfig& cfg,
                               const CommonArgs& args, double seconds) {
  const auto data = experiment::load_dataset(cfg);
  nlohmann::json inputs = {{"dataset", data.description}, {"content_hash", data.content_hash}};
  if (!args.config.empty()) {
    inputs["config_file"] = args.config;
    inputs["config_hash"] = experiment::hash_file(args.config);
  }
  return {{"verb", verb},
          {"config", experiment::to_json(cfg)},
          {"inputs", inputs},
          {"wall_time_seconds", seconds},
          {"jobs", args.jobs},
          {"selection", experiment::to_string(cfg.selection)},
          {"attack_threshold", "chosen on the evaluation candidates (attacker best case)"}};
}

int exit_for(const experiment::ExperimentResult& r) {
  if (r.failures.empty()) return kOk;
  const std::size_t runs = r.variants.size() * r.folds;
  bool divergence = false;
  for (const auto& f : r.failures) divergence = divergence || f.divergence;
  for (const auto& f : r.failures) std::cerr << "failed: " << f.variant << " fold " << f.fold << ": " << f.message << '\n';
  if (r.failures.size() >= runs && divergence) return kDivergence;
  return kPartialFailure;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_partition(const CommonArgs& args) {
  const auto cfg = load(args);
  const auto data = experiment::load_dataset(cfg);
  const auto fold = experiment::prepare_fold(data, cfg, 0);
  fs::create_directories(args.out);
  for (std::size_t i = 0; i < fold.clients.size(); ++i) {
    const std::string name = i < 26 ? std::string(1, static_cast<char>('A' + i)) : "client_" + std::to_string(i);
    graph::write_client_directory(fs::path(args.out) / ("client_" + name), fold.clients[i],
                                  {{"client", name},
                                   {"seed", cfg.seed},
                                   {"partition", experiment::to_json(cfg).at("partition")}});
    std::cout << "client " << name << ": " << fold.clients[i].node_count() << " nodes, "
              << fold.clients[i].edge_count() << " edges\n";
  }
  std::cout << "dropped edges: " << graph::dropped_edge_count(*fold.global, fold.clients) << '\n';
  return kOk;
}

int cmd_train(const CommonArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  const auto cfg = load(args);
  const auto data = experiment::load_dataset(cfg);
  auto fold = experiment::prepare_fold(data, cfg, 0);
  gat::LocalTrainer trainer(fold.global, fold.init, cfg.train, derive_seed(cfg.seed, "dropout", 0));
  fs::create_directories(args.out);
  std::ofstream log(fs::path(args.out) / "train_log.jsonl", std::ios::binary);
  for (std::size_t t = 1; t <= cfg.train.max_epoch; ++t) {
    gat::EpochResult r;
    try {
      r = trainer.train_epoch();
    } catch (const DivergenceError& e) {
      std::cerr << e.what() << '\n';
      return kDivergence;
    }
    log << nlohmann::json{{"epoch", t}, {"loss", r.loss}, {"val_acc", r.val_accuracy}, {"test_acc", r.test_accuracy}}.dump()
        << '\n';
  }
  gat::save_checkpoint(fs::path(args.out) / "model.json", trainer.params());
  const auto& g = trainer.graph();
  const double val = trainer.accuracy_on(g.validation_nodes());
  const double test = trainer.accuracy_on(g.test_nodes());
  std::cout << "validation accuracy " << val << ", test accuracy " << test << '\n';
  experiment::write_manifest(fs::path(args.out) / "manifest.json",
                             manifest_fields("train", cfg, args, seconds_since(start)));
  return kOk;
}

int cmd_federate(const CommonArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  const auto cfg = load(args);
  experiment::RunOptions options;
  options.jobs = args.jobs;
  options.variant_filter = args.variants;
  const auto result = cfg.partition.mode == graph::PartitionMode::edge_type
                          ? experiment::edge_type_experiment(cfg, options)
                          : experiment::run_experiment(cfg, options);
  experiment::write_experiment(args.out, result);
  experiment::write_manifest(fs::path(args.out) / "manifest.json",
                             manifest_fields("federate", cfg, args, seconds_since(start)));
  std::cout << experiment::result_table_markdown(result);
  return exit_for(result);
}

int cmd_attack(const CommonArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  const auto cfg = load(args);
  experiment::RunOptions options;
  options.jobs = args.jobs;
  const auto rows = experiment::attack_sweep(cfg, options);
  fs::create_directories(args.out);
  const auto csv = experiment::attack_report_csv(rows);
  experiment::write_text(fs::path(args.out) / "attack_report.csv", csv);
  experiment::write_manifest(fs::path(args.out) / "manifest.json",
                             manifest_fields("attack", cfg, args, seconds_since(start)));
  std::cout << csv;
  return kOk;
}

int cmd_sweep(const CommonArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  const auto cfg = load(args);
  experiment::RunOptions options;
  options.jobs = args.jobs;
  const auto points = experiment::client_count_sweep(cfg, options);
  fs::create_directories(args.out);
  const auto csv = experiment::gap_curve_csv(points);
  experiment::write_text(fs::path(args.out) / "gap_curve.csv", csv);
  experiment::write_manifest(fs::path(args.out) / "manifest.json",
                             manifest_fields("sweep", cfg, args, seconds_since(start)));
  std::cout << csv;
  return kOk;
}

int cmd_report(const CommonArgs& args) {
  const fs::path cells = fs::path(args.out) / "result_cells.csv";
  auto result = experiment::read_result_cells(cells);
  if (!args.variants.empty()) {
    std::vector<std::string> keep;
    for (const auto& v : result.variants) {
      if (std::find(args.variants.begin(), args.variants.end(), v) != args.variants.end()) keep.push_back(v);
    }
    result.variants = keep;
  }
  experiment::write_text(fs::path(args.out) / "result_table.csv", experiment::result_table_csv(result));
  experiment::write_text(fs::path(args.out) / "result_table_std.csv", experiment::result_table_std_csv(result));
  const auto md = experiment::result_table_markdown(result);
  experiment::write_text(fs::path(args.out) / "result_table.md", md);
  std::cout << md;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated graph attention simulator"};
  app.require_subcommand(1);
  CommonArgs args;

  auto* partition = app.add_subcommand("partition", "split and partition the dataset, write client directories");
  auto* train = app.add_subcommand("train", "train one model on the whole dataset");
  auto* federate = app.add_subcommand("federate", "run the configured variants over all folds");
  auto* attack = app.add_subcommand("attack", "membership-inference sweep over Alone / FLGNN / FLGNN+DP");
  auto* sweep = app.add_subcommand("sweep", "client-count sweep of the accuracy gaps");
  auto* report = app.add_subcommand("report", "rebuild tables from result_cells.csv in --out");
  for (auto* cmd : {partition, train, federate, attack, sweep}) add_common(cmd, args);
  add_common(report, args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*partition) return cmd_partition(args);
    if (*train) return cmd_train(args);
    if (*federate) return cmd_federate(args);
    if (*attack) return cmd_attack(args);
    if (*sweep) return cmd_sweep(args);
    if (*report) return cmd_report(args);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const DivergenceError& e) {
    std::cerr << e.what() << '\n';
    return kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOtherError;
  }
  return kOk;
}
