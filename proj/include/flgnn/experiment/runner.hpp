#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flgnn/experiment/config.hpp"
#include "flgnn/federation/runner.hpp"
#include "flgnn/gat/params.hpp"
#include "flgnn/graph/graph.hpp"
#include "flgnn/privacy/attack.hpp"

namespace flgnn::experiment {

// The global dataset: one graph, or one graph per edge type (same nodes).
struct Dataset {
  std::vector<graph::Graph> graphs;
  std::string description;
  std::string content_hash;  // git-style blob hash over the input files or the synthetic spec
};

Dataset load_dataset(const ExperimentConfig& cfg);

// One fold's inputs, shared by every variant of that fold.
struct FoldData {
  std::shared_ptr<const graph::Graph> global;
  std::vector<graph::Graph> clients;
  gat::ModelParams init;
};

// Re-splits the global graph with the fold's seed, partitions it (the same
// node sets every fold unless repartition_per_fold) and draws the shared
// initial parameters. `n_clients` overrides the configured client count.
FoldData prepare_fold(const Dataset& data, const ExperimentConfig& cfg, std::size_t fold,
                      std::optional<std::size_t> n_clients = std::nullopt);

struct RunCell {
  std::string variant;
  std::string client;
  std::size_t fold = 0;
  std::string run_id;
  double accuracy = 0.0;  // the configured selection rule applied
  double best_val_acc = 0.0;
  double test_at_best = 0.0;
  double final_test_acc = 0.0;
  std::size_t best_epoch = 0;
};

struct RunFailure {
  std::string variant;
  std::size_t fold = 0;
  bool divergence = false;
  std::string message;
};

struct ExperimentResult {
  std::vector<std::string> variants;
  std::vector<std::string> clients;
  std::size_t folds = 0;
  Selection selection = Selection::best_validation;
  std::vector<RunCell> cells;  // fold-major, then variant, then client
  std::vector<RunFailure> failures;
  std::vector<federation::RoundLog> logs;

  // Mean and sample standard deviation of the cells for (variant, client);
  // nullopt unless all `folds` runs succeeded.
  std::optional<double> mean(const std::string& variant, const std::string& client) const;
  std::optional<double> stddev(const std::string& variant, const std::string& client) const;
  std::vector<double> values(const std::string& variant, const std::string& client) const;
};

struct RunOptions {
  std::size_t jobs = 1;
  std::vector<std::string> variant_filter;  // empty: every configured variant
  bool keep_logs = true;
};

// Runs every variant on every fold. Failures of one variant are recorded
// without stopping the others. Results do not depend on `jobs`.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

// run_experiment with the Alone / FLGNN / FLGNN+ trio (all layers shared)
// unless the config lists its own variants.
ExperimentResult edge_type_experiment(ExperimentConfig cfg, const RunOptions& options = {});

struct GapPoint {
  std::size_t n_clients = 0;
  double full = 0.0;
  double flgnn = 0.0;
  double alone = 0.0;
  double gap_fl = 0.0;     // full - flgnn
  double gap_alone = 0.0;  // full - alone
};

// Full, FLGNN (sweep.plan) and Alone at each client count; client means
// averaged over folds.
std::vector<GapPoint> client_count_sweep(const ExperimentConfig& cfg, const RunOptions& options = {});

struct AttackRow {
  std::string scenario;  // Alone, FLGNN, FLGNN+DP
  privacy::AttackMode mode = privacy::AttackMode::black_box;
  std::optional<double> epsilon;
  std::uint64_t seed = 0;
  std::size_t fold = 0;
  double i_acc = 0.0;
  double i_adv = 0.0;
  double model_val_acc = 0.0;
  double model_test_acc = 0.0;
};

// Trains each scenario per fold and attacks the target client. White-box
// uses the target's last (noised) upload with the next client's unshared
// layers; for Alone nothing is uploaded, so white-box equals black-box.
std::vector<AttackRow> attack_sweep(const ExperimentConfig& cfg, const RunOptions& options = {});

}  // namespace flgnn::experiment
