#include "flgnn/experiment/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "flgnn/error.hpp"
#include "flgnn/experiment/manifest.hpp"
#include "flgnn/graph/align.hpp"
#include "flgnn/graph/io.hpp"
#include "flgnn/graph/partition.hpp"
#include "flgnn/graph/splits.hpp"
#include "flgnn/privacy/laplace.hpp"

namespace flgnn::experiment {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs job(i) for i in [0, count) on up to `jobs` threads. Each job writes
// only to its own slot, so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<federation::ClientState> client_states(const FoldData& fold,
                                                   const std::vector<std::shared_ptr<const graph::Graph>>& graphs) {
  std::vector<federation::ClientState> out;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    federation::ClientState c;
    c.client_id = i < 26 ? std::string(1, static_cast<char>('A' + i)) : "client_" + std::to_string(i);
    c.graph = graphs[i];
    c.params = fold.init;
    out.push_back(std::move(c));
  }
  return out;
}

std::string run_id_for(const std::string& variant, std::size_t fold) {
  return variant + "/fold" + std::to_string(fold);
}

struct FoldOutcome {
  std::vector<RunCell> cells;
  std::vector<RunFailure> failures;
  std::vector<federation::RoundLog> logs;
  std::vector<std::string> clients;
};

FoldOutcome run_fold(const Dataset& data, const ExperimentConfig& cfg, std::size_t fold,
                     const std::vector<std::string>& variants, bool keep_logs) {
  FoldOutcome out;
  FoldData fd;
  try {
    fd = prepare_fold(data, cfg, fold);
  } catch (const std::exception& e) {
    for (const auto& v : variants) out.failures.push_back({v, fold, false, e.what()});
    return out;
  }
  std::vector<std::shared_ptr<const graph::Graph>> graphs;
  for (auto& g : fd.clients) graphs.push_back(std::make_shared<const graph::Graph>(std::move(g)));
  fd.clients.clear();
  const auto states = client_states(fd, graphs);
  for (const auto& s : states) out.clients.push_back(s.client_id);
  const std::uint64_t dropout_seed = derive_seed(cfg.seed, "dropout", fold);

  for (const auto& variant : variants) {
    const std::string run_id = run_id_for(variant, fold);
    try {
      std::vector<federation::ClientOutcome> outcomes;
      if (variant == "Full") {
        outcomes = federation::baseline_full(fd.global, states, fd.init, cfg.train, dropout_seed).per_client;
      } else {
        federation::FederationOptions options;
        if (variant == "Alone") {
          options.aggregate = false;
        } else {
          options.plan = federation::AggregationPlan::parse(variant, cfg.federation.frequency);
        }
        options.eta = cfg.federation.eta;
        options.l_up = cfg.federation.l_up;
        options.run_id = run_id;
        options.dropout_seed = dropout_seed;
        auto result = federation::run_federation(states, options, cfg.train);
        outcomes = std::move(result.outcomes);
        if (keep_logs) out.logs.push_back(std::move(result.log));
      }
      for (std::size_t c = 0; c < outcomes.size(); ++c) {
        const auto& o = outcomes[c];
        RunCell cell;
        cell.variant = variant;
        cell.client = states[c].client_id;
        cell.fold = fold;
        cell.run_id = run_id;
        cell.best_val_acc = o.best_val_acc;
        cell.test_at_best = o.test_at_best;
        cell.final_test_acc = o.final_test_acc;
        cell.best_epoch = o.best_epoch;
        cell.accuracy = cfg.selection == Selection::best_validation ? o.test_at_best : o.final_test_acc;
        out.cells.push_back(std::move(cell));
      }
    } catch (const DivergenceError& e) {
      out.failures.push_back({variant, fold, true, e.what()});
    } catch (const std::exception& e) {
      out.failures.push_back({variant, fold, false, e.what()});
    }
  }
  return out;
}

graph::Graph union_of_edges(const std::vector<graph::Graph>& typed) {
  graph::Graph g = typed.front();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& t : typed) {
    for (const auto& e : t.edges) pairs.emplace_back(e.u, e.v);
  }
  g.edges = graph::canonicalize_edges(pairs);
  return g;
}

}  // namespace

Dataset load_dataset(const ExperimentConfig& cfg) {
  Dataset data;
  if (cfg.dataset.synthetic) {
    const auto& spec = *cfg.dataset.synthetic;
    data.graphs = graph::generate_synthetic(spec);
    const auto echo = to_json(cfg).at("dataset").dump();
    data.content_hash = git_blob_hash(echo);
    data.description = "synthetic " + cfg.dataset.synthetic_preset;
  } else {
    std::string listing;
    for (const auto& p : cfg.dataset.paths) {
      data.graphs.push_back(graph::load_graph_dir(p));
      listing += hash_directory(p) + '\n';
      if (!data.description.empty()) data.description += ", ";
      data.description += p.string();
    }
    if (data.graphs.size() > 1) data.graphs = graph::align_classes(graph::align_features(data.graphs));
    data.content_hash = cfg.dataset.paths.size() == 1 ? hash_directory(cfg.dataset.paths[0])
                                                      : git_blob_hash(listing);
  }
  return data;
}

FoldData prepare_fold(const Dataset& data, const ExperimentConfig& cfg, std::size_t fold,
                      std::optional<std::size_t> n_clients) {
  if (data.graphs.empty()) throw Error("dataset holds no graph");
  const std::uint64_t split_seed = derive_seed(cfg.seed, "split", fold);
  FoldData fd;
  if (cfg.partition.mode == graph::PartitionMode::edge_type) {
    const graph::Graph split = graph::make_splits(data.graphs.front(), cfg.partition.split_ratio, split_seed);
    std::vector<graph::Graph> typed = data.graphs;
    for (auto& t : typed) {
      if (t.node_ids != split.node_ids) throw Error("edge-type graphs must share one node list");
      t.roles = split.roles;
    }
    fd.clients = graph::partition_edge_types(typed);
    fd.global = std::make_shared<const graph::Graph>(union_of_edges(typed));
  } else {
    auto global = std::make_shared<graph::Graph>(
        graph::make_splits(data.graphs.front(), cfg.partition.split_ratio, split_seed));
    graph::PartitionSpec spec = cfg.partition;
    if (n_clients) spec.n_clients = *n_clients;
    if (cfg.repartition_per_fold) spec.seed = derive_seed(cfg.seed, "partition", fold);
    fd.clients = graph::align_features(graph::partition(*global, spec));
    fd.global = std::move(global);
  }
  fd.init = gat::init_params(cfg.train.dims_for(*fd.global), derive_seed(cfg.seed, "init", fold));
  return fd;
}

std::vector<double> ExperimentResult::values(const std::string& variant, const std::string& client) const {
  std::vector<double> out;
  for (const auto& c : cells) {
    if (c.variant == variant && c.client == client) out.push_back(c.accuracy);
  }
  return out;
}

std::optional<double> ExperimentResult::mean(const std::string& variant, const std::string& client) const {
  const auto v = values(variant, client);
  if (v.empty() || v.size() != folds) return std::nullopt;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::optional<double> ExperimentResult::stddev(const std::string& variant, const std::string& client) const {
  const auto v = values(variant, client);
  const auto m = mean(variant, client);
  if (!m) return std::nullopt;
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - *m) * (x - *m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  std::vector<std::string> variants;
  for (const auto& v : cfg.federation.variants) {
    const auto& filter = options.variant_filter;
    if (filter.empty() || std::find(filter.begin(), filter.end(), v) != filter.end()) variants.push_back(v);
  }
  for (const auto& v : options.variant_filter) {
    if (std::find(cfg.federation.variants.begin(), cfg.federation.variants.end(), v) ==
        cfg.federation.variants.end()) {
      if (!is_known_variant(v)) throw ConfigError({"--variant: unknown variant '" + v + "'"});
      variants.push_back(v);
    }
  }

  const Dataset data = load_dataset(cfg);
  std::vector<FoldOutcome> folds(cfg.folds);
  parallel_for(cfg.folds, options.jobs, [&](std::size_t fold) {
    folds[fold] = run_fold(data, cfg, fold, variants, options.keep_logs);
  });

  ExperimentResult result;
  result.variants = variants;
  result.folds = cfg.folds;
  result.selection = cfg.selection;
  for (auto& f : folds) {
    if (result.clients.empty()) result.clients = f.clients;
    for (auto& c : f.cells) result.cells.push_back(std::move(c));
    for (auto& e : f.failures) result.failures.push_back(std::move(e));
    for (auto& l : f.logs) result.logs.push_back(std::move(l));
  }
  if (result.clients.empty()) {
    for (std::size_t i = 0; i < cfg.partition.n_clients; ++i) {
      result.clients.push_back(i < 26 ? std::string(1, static_cast<char>('A' + i)) : "client_" + std::to_string(i));
    }
  }
  return result;
}

ExperimentResult edge_type_experiment(ExperimentConfig cfg, const RunOptions& options) {
  if (cfg.partition.mode != graph::PartitionMode::edge_type) {
    throw ConfigError({"edge-type experiment needs partition.mode edge_type"});
  }
  const std::vector<std::string> defaults{"FLGNN_L123", "Alone", "Full"};
  if (cfg.federation.variants == defaults) cfg.federation.variants = {"Alone", "FLGNN_L123", "FLGNN+_L123"};
  return run_experiment(cfg, options);
}

std::vector<GapPoint> client_count_sweep(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  std::vector<GapPoint> out;
  for (std::size_t count : cfg.sweep.client_counts) {
    ExperimentConfig c = cfg;
    c.partition.n_clients = count;
    c.attack.target_client = 0;
    const std::string plan = federation::AggregationPlan::parse(cfg.sweep.plan, cfg.federation.frequency).name();
    c.federation.variants = {plan, "Alone", "Full"};
    RunOptions o = options;
    o.variant_filter.clear();
    o.keep_logs = false;
    const auto result = run_experiment(c, o);
    auto average = [&](const std::string& variant) {
      double sum = 0.0;
      for (const auto& client : result.clients) {
        const auto m = result.mean(variant, client);
        if (!m) return kNaN;
        sum += *m;
      }
      return sum / static_cast<double>(result.clients.size());
    };
    GapPoint p;
    p.n_clients = count;
    p.full = average("Full");
    p.flgnn = average(plan);
    p.alone = average("Alone");
    p.gap_fl = p.full - p.flgnn;
    p.gap_alone = p.full - p.alone;
    out.push_back(p);
  }
  return out;
}

std::vector<AttackRow> attack_sweep(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const Dataset data = load_dataset(cfg);
  const std::size_t target = cfg.attack.target_client;
  std::vector<std::vector<AttackRow>> per_fold(cfg.folds);

  parallel_for(cfg.folds, options.jobs, [&](std::size_t fold) {
    FoldData fd = prepare_fold(data, cfg, fold);
    std::vector<std::shared_ptr<const graph::Graph>> graphs;
    for (auto& g : fd.clients) graphs.push_back(std::make_shared<const graph::Graph>(std::move(g)));
    const auto states = client_states(fd, graphs);
    const std::size_t attacker = (target + 1) % states.size();
    const auto& target_graph = *graphs.at(target);
    const auto candidates = privacy::default_candidates(target_graph, derive_seed(cfg.seed, "attack", fold));
    const auto plan = federation::AggregationPlan::parse(cfg.attack.plan, cfg.federation.frequency);
    auto& rows = per_fold[fold];

    auto attack = [&](const std::string& scenario, std::optional<double> epsilon,
                      const federation::FederationResult& run, bool shared) {
      const auto outputs = gat::model_forward(run.clients[target].params, target_graph, cfg.train.leaky_slope);
      const auto black = privacy::black_box_attack(outputs, candidates);
      for (auto mode : cfg.attack.modes) {
        privacy::AttackReport report = black;
        if (mode == privacy::AttackMode::white_box && shared && !run.last_uploads.empty()) {
          report = privacy::white_box_attack(run.last_uploads[target], run.clients[attacker].params,
                                             target_graph, candidates);
        }
        AttackRow row;
        row.scenario = scenario;
        row.mode = mode;
        row.epsilon = epsilon;
        row.seed = cfg.seed;
        row.fold = fold;
        row.i_acc = report.i_acc;
        row.i_adv = report.i_adv;
        row.model_val_acc = run.outcomes[target].final_val_acc;
        row.model_test_acc = run.outcomes[target].final_test_acc;
        rows.push_back(row);
      }
    };

    const std::uint64_t dropout_seed = derive_seed(cfg.seed, "dropout", fold);
    for (const auto& scenario : cfg.attack.scenarios) {
      federation::FederationOptions opt;
      opt.plan = plan;
      opt.eta = cfg.federation.eta;
      opt.l_up = cfg.federation.l_up;
      opt.dropout_seed = dropout_seed;
      if (scenario == "Alone") {
        opt.aggregate = false;
        opt.run_id = run_id_for("Alone", fold);
        attack(scenario, std::nullopt, federation::run_federation(states, opt, cfg.train), false);
      } else if (scenario == "FLGNN") {
        opt.run_id = run_id_for(plan.name(), fold);
        attack(scenario, std::nullopt, federation::run_federation(states, opt, cfg.train), true);
      } else {
        for (double eps : cfg.dp.epsilons) {
          privacy::DpConfig dp;
          dp.epsilon = eps;
          dp.clip_bound = cfg.dp.clip_bound;
          dp.seed = derive_seed(cfg.seed, "dp", fold);
          opt.upload_transform = privacy::dp_upload_transform(dp);
          opt.run_id = run_id_for(plan.name() + "+DP", fold);
          attack(scenario, eps, federation::run_federation(states, opt, cfg.train), true);
        }
      }
    }
  });

  std::vector<AttackRow> out;
  for (auto& rows : per_fold) {
    for (auto& r : rows) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace flgnn::experiment
