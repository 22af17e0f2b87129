#include "flgnn/federation/runner.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "flgnn/error.hpp"
#include "flgnn/random.hpp"

namespace flgnn::federation {
namespace {

// Tracks the first epoch with the highest validation accuracy. NaN never wins.
struct BestTracker {
  ClientOutcome outcome;
  bool seen = false;

  bool offer(std::size_t epoch, double val, double test) {
    outcome.final_val_acc = val;
    outcome.final_test_acc = test;
    if (!seen || val > outcome.best_val_acc ||
        (std::isnan(outcome.best_val_acc) && !std::isnan(val))) {
      seen = true;
      outcome.best_epoch = epoch;
      outcome.best_val_acc = val;
      outcome.test_at_best = test;
      return true;
    }
    return false;
  }
};

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

std::string client_name(std::size_t index) {
  if (index < 26) return std::string(1, static_cast<char>('A' + index));
  return "client_" + std::to_string(index);
}

}  // namespace

std::string to_string(Phase phase) { return phase == Phase::pre ? "pre" : "post"; }

nlohmann::json RoundLog::record_json(const RoundRecord& r) const {
  auto number = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json j = {{"epoch", r.epoch},
                      {"client", r.client},
                      {"phase", to_string(r.phase)},
                      {"val_acc", number(r.val_acc)},
                      {"test_acc", number(r.test_acc)},
                      {"run_id", run_id}};
  if (r.gamma_row) j["gamma_row"] = *r.gamma_row;
  return j;
}

void RoundLog::write_jsonl(std::ostream& out) const {
  for (const auto& r : records) out << record_json(r).dump() << '\n';
}

std::vector<ClientState> make_clients(const std::vector<graph::Graph>& graphs,
                                      const gat::ModelParams& init) {
  std::vector<ClientState> clients;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    ClientState c;
    c.client_id = client_name(i);
    c.graph = std::make_shared<const graph::Graph>(graphs[i]);
    c.params = init;
    clients.push_back(std::move(c));
  }
  return clients;
}

FederationResult run_federation(std::vector<ClientState> clients, const FederationOptions& options,
                                const gat::TrainConfig& cfg) {
  if (clients.empty()) throw std::invalid_argument("federation needs at least one client");
  cfg.validate();
  options.plan.validate();
  const std::size_t n = clients.size();
  const auto& plan = options.plan;
  const bool dynamic = plan.weighting == Weighting::dynamic;

  std::vector<gat::LocalTrainer> trainers;
  trainers.reserve(n);
  for (std::size_t u = 0; u < n; ++u) {
    if (!clients[u].graph) throw std::invalid_argument("client " + clients[u].client_id + " has no graph");
    if (u > 0 && clients[u].graph->feature_dim() != clients[0].graph->feature_dim()) {
      throw DimensionError("client " + clients[u].client_id + " is not feature-aligned with client " +
                           clients[0].client_id);
    }
    trainers.emplace_back(clients[u].graph, clients[u].params, cfg,
                          derive_seed(options.dropout_seed, "dropout", u));
  }

  FederationResult result;
  result.log.run_id = options.run_id;
  result.log.bytes_per_event = bytes_shared(plan, clients[0].params.dims());
  DynamicWeights weights;
  if (dynamic) weights = DynamicWeights::uniform(n, options.eta, options.l_up);
  const numerics::Matrix uniform = uniform_weights(n);

  std::vector<BestTracker> best(n);
  std::vector<const gat::ModelParams*> views(n);

  for (std::size_t t = 1; t <= cfg.max_epoch; ++t) {
    std::vector<gat::EpochResult> epoch_results(n);
    for (std::size_t u = 0; u < n; ++u) {
      try {
        epoch_results[u] = trainers[u].train_epoch();
      } catch (const DivergenceError&) {
        throw DivergenceError(t, clients[u].client_id);
      }
      clients[u].accuracy_history.push_back(epoch_results[u].val_accuracy);
      clients[u].epoch = t;
      RoundRecord r{t, clients[u].client_id, Phase::pre, epoch_results[u].val_accuracy,
                    epoch_results[u].test_accuracy, std::nullopt};
      result.log.records.push_back(std::move(r));
    }

    const bool aggregate_now = options.aggregate && plan.fires(t);
    if (aggregate_now) {
      if (dynamic && t > plan.frequency) {
        for (std::size_t u = 0; u < n; ++u) {
          const auto& hist = clients[u].accuracy_history;
          weights = flgnn_plus_update(std::move(weights), u, hist[t - plan.frequency - 1], hist[t - 1]);
        }
        weights.validate();
      }
      std::vector<ParameterRecord> uploads;
      uploads.reserve(n);
      for (std::size_t u = 0; u < n; ++u) {
        auto record = extract_shared(trainers[u].params(), plan, clients[u].client_id);
        if (options.upload_transform) record = options.upload_transform(record, u, t);
        uploads.push_back(std::move(record));
      }
      const auto combined = combine_uploads(uploads, dynamic ? weights.gamma : uniform);
      for (std::size_t u = 0; u < n; ++u) install_shared(trainers[u].params(), combined[u]);
      result.last_uploads = std::move(uploads);
      ++result.log.aggregation_events;

      for (std::size_t u = 0; u < n; ++u) {
        const auto probs = trainers[u].predict();
        const auto& g = trainers[u].graph();
        const auto val = g.validation_nodes();
        const auto test = g.test_nodes();
        RoundRecord r{t, clients[u].client_id, Phase::post,
                      val.empty() ? nan_value() : gat::accuracy(probs, g.labels, val),
                      test.empty() ? nan_value() : gat::accuracy(probs, g.labels, test), std::nullopt};
        if (dynamic) {
          const auto row = weights.gamma.row(u);
          r.gamma_row = std::vector<double>(row.begin(), row.end());
        }
        best[u].offer(t, r.val_acc, r.test_acc);
        result.log.records.push_back(std::move(r));
      }
    } else {
      for (std::size_t u = 0; u < n; ++u) {
        best[u].offer(t, epoch_results[u].val_accuracy, epoch_results[u].test_accuracy);
      }
    }

    if (options.observer) {
      for (std::size_t u = 0; u < n; ++u) views[u] = &trainers[u].params();
      options.observer(t, views);
    }
  }

  for (std::size_t u = 0; u < n; ++u) {
    clients[u].params = trainers[u].params();
    result.outcomes.push_back(best[u].outcome);
  }
  result.clients = std::move(clients);
  if (dynamic) result.weights = std::move(weights);
  return result;
}

FederationResult baseline_alone(std::vector<ClientState> clients, const gat::TrainConfig& cfg,
                                const std::string& run_id) {
  FederationOptions options;
  options.aggregate = false;
  options.run_id = run_id;
  return run_federation(std::move(clients), options, cfg);
}

FullBaseline baseline_full(std::shared_ptr<const graph::Graph> global,
                           const std::vector<ClientState>& clients, const gat::ModelParams& init,
                           const gat::TrainConfig& cfg, std::uint64_t dropout_seed) {
  gat::LocalTrainer trainer(global, init, cfg, derive_seed(dropout_seed, "dropout-full"));
  BestTracker tracker;
  gat::ModelParams best_params = init;
  for (std::size_t t = 1; t <= cfg.max_epoch; ++t) {
    gat::EpochResult r;
    try {
      r = trainer.train_epoch();
    } catch (const DivergenceError&) {
      throw DivergenceError(t, "full");
    }
    if (tracker.offer(t, r.val_accuracy, r.test_accuracy)) best_params = trainer.params();
  }

  FullBaseline out;
  out.params = trainer.params();
  out.global = tracker.outcome;
  for (const auto& c : clients) {
    const auto& g = *c.graph;
    const auto adj = gat::build_adjacency(g);
    const auto val = g.validation_nodes();
    const auto test = g.test_nodes();
    auto eval = [&](const gat::ModelParams& p, std::span<const std::size_t> mask) {
      if (mask.empty()) return nan_value();
      return gat::accuracy(gat::model_forward(p, g.features, adj, cfg.leaky_slope), g.labels, mask);
    };
    ClientOutcome o;
    o.best_epoch = tracker.outcome.best_epoch;
    o.best_val_acc = eval(best_params, val);
    o.test_at_best = eval(best_params, test);
    o.final_val_acc = eval(out.params, val);
    o.final_test_acc = eval(out.params, test);
    out.per_client.push_back(o);
  }
  return out;
}

}  // namespace flgnn::federation
