#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flgnn/federation/plan.hpp"
#include "flgnn/gat/train.hpp"
#include "flgnn/graph/partition.hpp"
#include "flgnn/graph/synthetic.hpp"
#include "flgnn/privacy/attack.hpp"
#include "flgnn/privacy/laplace.hpp"
#include "json.hpp"

namespace flgnn::experiment {

// Where the global graph comes from: a directory (CSV triple or LINQS pair),
// one directory per edge type, or a synthetic generator.
struct DatasetConfig {
  std::vector<std::filesystem::path> paths;
  std::optional<graph::SyntheticSpec> synthetic;
  std::string synthetic_preset;  // "cora-like", "citeseer-like", "custom" or empty
};

enum class Selection { best_validation, final_epoch };

struct FederationSettings {
  std::vector<std::string> variants{"FLGNN_L123", "Alone", "Full"};
  std::size_t frequency = 2;
  double eta = 0.05;
  double l_up = 0.9;
};

struct DpSettings {
  std::vector<double> epsilons{0.5, 1.0, 2.0, 4.0, 8.0};
  double clip_bound = 1.0;
};

struct AttackSettings {
  std::size_t target_client = 0;
  std::vector<privacy::AttackMode> modes{privacy::AttackMode::black_box,
                                         privacy::AttackMode::white_box};
  // "Alone", "FLGNN" and "FLGNN+DP" (one scenario per epsilon).
  std::vector<std::string> scenarios{"Alone", "FLGNN", "FLGNN+DP"};
  std::string plan = "L123";
};

struct SweepSettings {
  std::vector<std::size_t> client_counts{2, 3, 4, 5};
  std::string plan = "L123";
};

struct ExperimentConfig {
  DatasetConfig dataset;
  graph::PartitionSpec partition;
  bool repartition_per_fold = false;
  gat::TrainConfig train;
  FederationSettings federation;
  DpSettings dp;
  AttackSettings attack;
  SweepSettings sweep;
  Selection selection = Selection::best_validation;
  std::size_t folds = 10;
  std::uint64_t seed = 0;

  // Every problem at once; throws ConfigError if there is any.
  void validate() const;
  std::vector<std::string> issues() const;
};

// Parses and validates. Relative dataset paths are resolved against
// `base_dir`. Throws ConfigError listing every problem found.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Full config with every default filled in (echoed into the manifest).
nlohmann::json to_json(const ExperimentConfig& cfg);

std::string to_string(Selection s);

// "Alone", "Full" or an aggregation plan name.
bool is_known_variant(const std::string& name);

}  // namespace flgnn::experiment
