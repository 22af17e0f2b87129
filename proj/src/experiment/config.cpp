#include "flgnn/experiment/config.hpp"

#include <fstream>
#include <functional>
#include <set>

#include "flgnn/error.hpp"

namespace flgnn::experiment {

using nlohmann::json;

namespace {

class Reader {
 public:
  explicit Reader(std::vector<std::string>& issues) : issues_(issues) {}

  // Reads `key` from `obj` into `out` if present; records a type problem.
  template <typename T>
  void get(const json& obj, const std::string& path, const std::string& key, T& out) {
    if (!obj.contains(key)) return;
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception&) {
      issues_.push_back(path + key + ": wrong type (" + obj.at(key).dump() + ")");
    }
  }

  void unknown_keys(const json& obj, const std::string& path, const std::set<std::string>& known) {
    for (const auto& [key, value] : obj.items()) {
      if (!known.count(key)) issues_.push_back(path + key + ": unknown setting");
    }
  }

  bool object(const json& obj, const std::string& path) {
    if (obj.is_object()) return true;
    issues_.push_back(path + ": expected an object");
    return false;
  }

  void issue(std::string text) { issues_.push_back(std::move(text)); }

 private:
  std::vector<std::string>& issues_;
};

graph::SyntheticSpec parse_synthetic(const json& j, Reader& r, std::uint64_t default_seed,
                                     std::string& preset) {
  graph::SyntheticSpec spec;
  preset = "custom";
  std::uint64_t seed = default_seed;
  r.get(j, "dataset.synthetic.", "seed", seed);
  if (j.contains("preset")) {
    r.get(j, "dataset.synthetic.", "preset", preset);
    if (preset == "cora-like") {
      spec = graph::cora_like_spec(seed);
    } else if (preset == "citeseer-like") {
      spec = graph::citeseer_like_spec(seed);
    } else if (preset != "custom") {
      r.issue("dataset.synthetic.preset: unknown preset '" + preset + "'");
    }
  }
  spec.seed = seed;
  r.unknown_keys(j, "dataset.synthetic.",
                 {"preset", "seed", "n_nodes", "n_classes", "feature_dim", "intra_class_edge_prob",
                  "inter_class_edge_prob", "edge_types", "type_probabilities", "class_weights",
                  "feature_model", "feature_signal", "feature_noise", "words_per_node",
                  "topic_fraction", "topic_words"});
  r.get(j, "dataset.synthetic.", "n_nodes", spec.n_nodes);
  r.get(j, "dataset.synthetic.", "n_classes", spec.n_classes);
  r.get(j, "dataset.synthetic.", "feature_dim", spec.feature_dim);
  r.get(j, "dataset.synthetic.", "intra_class_edge_prob", spec.intra_class_edge_prob);
  r.get(j, "dataset.synthetic.", "inter_class_edge_prob", spec.inter_class_edge_prob);
  r.get(j, "dataset.synthetic.", "edge_types", spec.edge_types);
  r.get(j, "dataset.synthetic.", "class_weights", spec.class_weights);
  r.get(j, "dataset.synthetic.", "feature_signal", spec.feature_signal);
  r.get(j, "dataset.synthetic.", "feature_noise", spec.feature_noise);
  r.get(j, "dataset.synthetic.", "words_per_node", spec.words_per_node);
  r.get(j, "dataset.synthetic.", "topic_fraction", spec.topic_fraction);
  r.get(j, "dataset.synthetic.", "topic_words", spec.topic_words);
  if (j.contains("type_probabilities")) {
    const auto& tp = j.at("type_probabilities");
    if (!tp.is_array()) {
      r.issue("dataset.synthetic.type_probabilities: expected a list of [intra, inter] pairs");
    } else {
      spec.type_probabilities.clear();
      for (const auto& pair : tp) {
        if (pair.is_array() && pair.size() == 2 && pair[0].is_number() && pair[1].is_number()) {
          spec.type_probabilities.push_back({pair[0].get<double>(), pair[1].get<double>()});
        } else {
          r.issue("dataset.synthetic.type_probabilities: each entry must be [intra, inter]");
        }
      }
    }
  }
  if (j.contains("feature_model")) {
    std::string model;
    r.get(j, "dataset.synthetic.", "feature_model", model);
    if (model == "gaussian") {
      spec.feature_model = graph::FeatureModel::gaussian;
    } else if (model == "bag_of_words") {
      spec.feature_model = graph::FeatureModel::bag_of_words;
    } else {
      r.issue("dataset.synthetic.feature_model: expected gaussian or bag_of_words");
    }
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    r.issue(std::string("dataset.synthetic: ") + e.what());
  }
  return spec;
}

}  // namespace

std::string to_string(Selection s) {
  return s == Selection::best_validation ? "best_validation" : "final_epoch";
}

bool is_known_variant(const std::string& name) {
  if (name == "Alone" || name == "Full") return true;
  try {
    federation::AggregationPlan::parse(name).validate();
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

std::vector<std::string> ExperimentConfig::issues() const {
  std::vector<std::string> out;
  if (dataset.paths.empty() && !dataset.synthetic) out.push_back("dataset: give a path or a synthetic spec");
  if (!dataset.paths.empty() && dataset.synthetic) out.push_back("dataset: give either paths or a synthetic spec, not both");
  for (const auto& p : dataset.paths) {
    if (!std::filesystem::is_directory(p)) out.push_back("dataset.path: no such directory " + p.string());
  }
  if (dataset.synthetic) {
    try {
      dataset.synthetic->validate();
    } catch (const std::invalid_argument& e) {
      out.push_back(std::string("dataset.synthetic: ") + e.what());
    }
  }
  try {
    partition.validate();
  } catch (const std::exception& e) {
    out.push_back(std::string("partition: ") + e.what());
  }
  if (partition.mode == graph::PartitionMode::edge_type) {
    const std::size_t types = dataset.synthetic ? dataset.synthetic->edge_types : dataset.paths.size();
    if (types < 2) out.push_back("partition.mode edge_type needs at least two edge-type graphs");
    if (partition.n_clients != types) {
      out.push_back("partition.n_clients must equal the number of edge types (" + std::to_string(types) + ")");
    }
  } else if (dataset.paths.size() > 1) {
    out.push_back("dataset.paths: several graphs are only meaningful with partition.mode edge_type");
  }
  try {
    train.validate();
  } catch (const std::invalid_argument& e) {
    out.push_back(std::string("train: ") + e.what());
  }
  if (train.max_epoch == 0) out.push_back("train.max_epoch must be at least 1");
  if (federation.variants.empty()) out.push_back("federation.variants: list at least one variant");
  for (const auto& v : federation.variants) {
    if (!is_known_variant(v)) out.push_back("federation.variants: unknown variant '" + v + "'");
  }
  if (federation.frequency == 0) out.push_back("federation.frequency must be at least 1");
  if (!(federation.eta >= 0.0)) out.push_back("federation.eta must be >= 0");
  if (!(federation.l_up > 0.0 && federation.l_up <= 1.0)) {
    out.push_back("federation.l_up must lie in (0, 1]");
  } else if (partition.n_clients > 1 &&
             !(federation.l_up > 1.0 / static_cast<double>(partition.n_clients))) {
    out.push_back("federation.l_up must exceed 1 / n_clients");
  }
  if (dp.epsilons.empty()) out.push_back("dp.epsilons: list at least one budget");
  for (double e : dp.epsilons) {
    if (!(e > 0.0)) out.push_back("dp.epsilons: every budget must be positive");
  }
  if (!(dp.clip_bound > 0.0)) out.push_back("dp.clip_bound must be positive");
  if (attack.target_client >= partition.n_clients) {
    out.push_back("attack.target_client must name one of the clients");
  }
  for (const auto& s : attack.scenarios) {
    if (s != "Alone" && s != "FLGNN" && s != "FLGNN+DP") {
      out.push_back("attack.scenarios: unknown scenario '" + s + "'");
    }
  }
  if (!is_known_variant(attack.plan) || attack.plan == "Alone" || attack.plan == "Full") {
    out.push_back("attack.plan: not an aggregation plan");
  }
  for (std::size_t c : sweep.client_counts) {
    if (c < 2) out.push_back("sweep.client_counts: every count must be at least 2");
  }
  if (!is_known_variant(sweep.plan) || sweep.plan == "Alone" || sweep.plan == "Full") {
    out.push_back("sweep.plan: not an aggregation plan");
  }
  if (folds == 0) out.push_back("folds must be at least 1");
  return out;
}

void ExperimentConfig::validate() const {
  auto problems = issues();
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  std::vector<std::string> issues;
  Reader r(issues);
  ExperimentConfig cfg;
  if (!r.object(doc, "config")) throw ConfigError(issues);
  r.unknown_keys(doc, "", {"dataset", "partition", "train", "federation", "dp", "attack", "sweep",
                           "selection", "folds", "seed"});
  r.get(doc, "", "seed", cfg.seed);
  r.get(doc, "", "folds", cfg.folds);
  if (doc.contains("selection")) {
    std::string s;
    r.get(doc, "", "selection", s);
    if (s == "best_validation") {
      cfg.selection = Selection::best_validation;
    } else if (s == "final_epoch") {
      cfg.selection = Selection::final_epoch;
    } else {
      r.issue("selection: expected best_validation or final_epoch");
    }
  }

  if (!doc.contains("dataset")) {
    r.issue("dataset: missing");
  } else if (r.object(doc.at("dataset"), "dataset")) {
    const auto& d = doc.at("dataset");
    r.unknown_keys(d, "dataset.", {"path", "paths", "synthetic"});
    std::vector<std::string> paths;
    if (d.contains("path")) {
      std::string p;
      r.get(d, "dataset.", "path", p);
      paths.push_back(p);
    }
    if (d.contains("paths")) r.get(d, "dataset.", "paths", paths);
    for (const auto& p : paths) {
      std::filesystem::path path(p);
      cfg.dataset.paths.push_back(path.is_relative() ? base_dir / path : path);
    }
    if (d.contains("synthetic")) {
      if (r.object(d.at("synthetic"), "dataset.synthetic")) {
        cfg.dataset.synthetic = parse_synthetic(d.at("synthetic"), r, cfg.seed, cfg.dataset.synthetic_preset);
      }
    }
  }

  if (doc.contains("partition") && r.object(doc.at("partition"), "partition")) {
    const auto& p = doc.at("partition");
    r.unknown_keys(p, "partition.", {"mode", "n_clients", "overlap_fraction", "split_ratio",
                                     "repartition_per_fold"});
    if (p.contains("mode")) {
      std::string mode;
      r.get(p, "partition.", "mode", mode);
      try {
        cfg.partition.mode = graph::parse_partition_mode(mode);
      } catch (const std::exception& e) {
        r.issue(std::string("partition.mode: ") + e.what());
      }
      if (cfg.partition.mode == graph::PartitionMode::disjoint && !p.contains("overlap_fraction")) {
        cfg.partition.overlap_fraction = 0.0;
      }
    }
    r.get(p, "partition.", "n_clients", cfg.partition.n_clients);
    if (cfg.partition.mode == graph::PartitionMode::edge_type && !p.contains("n_clients")) {
      cfg.partition.n_clients = cfg.dataset.synthetic ? cfg.dataset.synthetic->edge_types
                                                      : cfg.dataset.paths.size();
    }
    r.get(p, "partition.", "overlap_fraction", cfg.partition.overlap_fraction);
    r.get(p, "partition.", "repartition_per_fold", cfg.repartition_per_fold);
    if (p.contains("split_ratio")) {
      std::vector<double> ratio;
      r.get(p, "partition.", "split_ratio", ratio);
      if (ratio.size() == 3) {
        cfg.partition.split_ratio = {ratio[0], ratio[1], ratio[2]};
      } else {
        r.issue("partition.split_ratio: expected [train, validation, test]");
      }
    }
  }
  cfg.partition.seed = derive_seed(cfg.seed, "partition");

  if (doc.contains("train") && r.object(doc.at("train"), "train")) {
    const auto& t = doc.at("train");
    r.unknown_keys(t, "train.", {"lr", "l2", "nhid", "nhead", "max_epoch", "dropout", "leaky_slope"});
    r.get(t, "train.", "lr", cfg.train.lr);
    r.get(t, "train.", "l2", cfg.train.l2);
    r.get(t, "train.", "nhid", cfg.train.nhid);
    r.get(t, "train.", "nhead", cfg.train.nhead);
    r.get(t, "train.", "max_epoch", cfg.train.max_epoch);
    r.get(t, "train.", "dropout", cfg.train.dropout);
    r.get(t, "train.", "leaky_slope", cfg.train.leaky_slope);
  }
  cfg.train.seed = cfg.seed;

  if (doc.contains("federation") && r.object(doc.at("federation"), "federation")) {
    const auto& f = doc.at("federation");
    r.unknown_keys(f, "federation.", {"variants", "frequency", "eta", "l_up"});
    r.get(f, "federation.", "variants", cfg.federation.variants);
    r.get(f, "federation.", "frequency", cfg.federation.frequency);
    r.get(f, "federation.", "eta", cfg.federation.eta);
    r.get(f, "federation.", "l_up", cfg.federation.l_up);
  }

  if (doc.contains("dp") && r.object(doc.at("dp"), "dp")) {
    const auto& d = doc.at("dp");
    r.unknown_keys(d, "dp.", {"epsilons", "clip_bound"});
    r.get(d, "dp.", "epsilons", cfg.dp.epsilons);
    r.get(d, "dp.", "clip_bound", cfg.dp.clip_bound);
  }

  if (doc.contains("attack") && r.object(doc.at("attack"), "attack")) {
    const auto& a = doc.at("attack");
    r.unknown_keys(a, "attack.", {"target_client", "modes", "scenarios", "plan"});
    r.get(a, "attack.", "target_client", cfg.attack.target_client);
    r.get(a, "attack.", "scenarios", cfg.attack.scenarios);
    r.get(a, "attack.", "plan", cfg.attack.plan);
    if (a.contains("modes")) {
      std::vector<std::string> modes;
      r.get(a, "attack.", "modes", modes);
      cfg.attack.modes.clear();
      for (const auto& m : modes) {
        try {
          cfg.attack.modes.push_back(privacy::parse_attack_mode(m));
        } catch (const std::invalid_argument& e) {
          r.issue(std::string("attack.modes: ") + e.what());
        }
      }
    }
  }

  if (doc.contains("sweep") && r.object(doc.at("sweep"), "sweep")) {
    const auto& s = doc.at("sweep");
    r.unknown_keys(s, "sweep.", {"client_counts", "plan"});
    r.get(s, "sweep.", "client_counts", cfg.sweep.client_counts);
    r.get(s, "sweep.", "plan", cfg.sweep.plan);
  }

  for (auto& issue : cfg.issues()) issues.push_back(std::move(issue));
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file " + path.string()});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
  return parse_config(doc, path.parent_path());
}

json to_json(const ExperimentConfig& cfg) {
  json dataset = json::object();
  if (!cfg.dataset.paths.empty()) {
    std::vector<std::string> paths;
    for (const auto& p : cfg.dataset.paths) paths.push_back(p.string());
    dataset["paths"] = paths;
  }
  if (cfg.dataset.synthetic) {
    const auto& s = *cfg.dataset.synthetic;
    json types = json::array();
    for (const auto& p : s.type_probabilities) types.push_back({p.intra, p.inter});
    dataset["synthetic"] = {
        {"preset", cfg.dataset.synthetic_preset},
        {"seed", s.seed},
        {"n_nodes", s.n_nodes},
        {"n_classes", s.n_classes},
        {"feature_dim", s.feature_dim},
        {"intra_class_edge_prob", s.intra_class_edge_prob},
        {"inter_class_edge_prob", s.inter_class_edge_prob},
        {"edge_types", s.edge_types},
        {"type_probabilities", types},
        {"class_weights", s.class_weights},
        {"feature_model", s.feature_model == graph::FeatureModel::gaussian ? "gaussian" : "bag_of_words"},
        {"feature_signal", s.feature_signal},
        {"feature_noise", s.feature_noise},
        {"words_per_node", s.words_per_node},
        {"topic_fraction", s.topic_fraction},
        {"topic_words", s.topic_words},
    };
  }
  const auto& r = cfg.partition.split_ratio;
  std::vector<std::string> modes;
  for (auto m : cfg.attack.modes) modes.push_back(privacy::to_string(m));
  return {
      {"dataset", dataset},
      {"partition",
       {{"mode", graph::to_string(cfg.partition.mode)},
        {"n_clients", cfg.partition.n_clients},
        {"overlap_fraction", cfg.partition.overlap_fraction},
        {"split_ratio", {r.train, r.validation, r.test}},
        {"repartition_per_fold", cfg.repartition_per_fold}}},
      {"train",
       {{"lr", cfg.train.lr},
        {"l2", cfg.train.l2},
        {"nhid", cfg.train.nhid},
        {"nhead", cfg.train.nhead},
        {"max_epoch", cfg.train.max_epoch},
        {"dropout", cfg.train.dropout},
        {"leaky_slope", cfg.train.leaky_slope}}},
      {"federation",
       {{"variants", cfg.federation.variants},
        {"frequency", cfg.federation.frequency},
        {"eta", cfg.federation.eta},
        {"l_up", cfg.federation.l_up}}},
      {"dp", {{"epsilons", cfg.dp.epsilons}, {"clip_bound", cfg.dp.clip_bound}}},
      {"attack",
       {{"target_client", cfg.attack.target_client},
        {"modes", modes},
        {"scenarios", cfg.attack.scenarios},
        {"plan", cfg.attack.plan}}},
      {"sweep", {{"client_counts", cfg.sweep.client_counts}, {"plan", cfg.sweep.plan}}},
      {"selection", to_string(cfg.selection)},
      {"folds", cfg.folds},
      {"seed", cfg.seed},
  };
}

}  // namespace flgnn::experiment
