#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flgnn/federation/aggregate.hpp"
#include "flgnn/federation/dynamic_weights.hpp"
#include "flgnn/federation/plan.hpp"
#include "flgnn/gat/train.hpp"
#include "flgnn/graph/graph.hpp"
#include "json.hpp"

namespace flgnn::federation {

struct ClientState {
  std::string client_id;
  std::shared_ptr<const graph::Graph> graph;
  gat::ModelParams params;
  std::vector<double> accuracy_history;  // M_{u,t}: validation accuracy after the local step
  std::size_t epoch = 0;
};

enum class Phase { pre, post };

struct RoundRecord {
  std::size_t epoch = 0;
  std::string client;
  Phase phase = Phase::pre;
  double val_acc = 0.0;
  double test_acc = 0.0;
  std::optional<std::vector<double>> gamma_row;
};

// Append-only per-epoch trace: a "pre" record per client every epoch and a
// "post" record per client after each aggregation.
struct RoundLog {
  std::string run_id;
  std::size_t bytes_per_event = 0;  // one client's upload
  std::size_t aggregation_events = 0;
  std::vector<RoundRecord> records;

  nlohmann::json record_json(const RoundRecord& r) const;
  void write_jsonl(std::ostream& out) const;
};

// Accuracy of one client's run, with both selection rules.
struct ClientOutcome {
  std::size_t best_epoch = 0;  // first epoch with the highest end-of-epoch validation accuracy
  double best_val_acc = 0.0;
  double test_at_best = 0.0;
  double final_val_acc = 0.0;
  double final_test_acc = 0.0;
};

// Applied by each client to its record before upload (identity by default;
// differential privacy plugs in here).
using UploadTransform =
    std::function<ParameterRecord(const ParameterRecord&, std::size_t client, std::size_t epoch)>;

// Sees every client's parameters at the end of each epoch.
using EpochObserver =
    std::function<void(std::size_t epoch, const std::vector<const gat::ModelParams*>& params)>;

struct FederationOptions {
  AggregationPlan plan;
  bool aggregate = true;
  double eta = 0.05;
  double l_up = 0.9;
  UploadTransform upload_transform;
  EpochObserver observer;
  std::string run_id;
  std::uint64_t dropout_seed = 0;
};

struct FederationResult {
  std::vector<ClientState> clients;
  std::vector<ClientOutcome> outcomes;
  RoundLog log;
  std::vector<ParameterRecord> last_uploads;  // after the upload transform
  std::optional<DynamicWeights> weights;
};

// Trains every client for cfg.max_epoch epochs, aggregating per plan after
// epoch t when t % q == 0. Static plans average; dynamic plans first update
// each client's gamma row from M_{u,t} against M_{u,t-q}, then blend.
// A DivergenceError names the client and epoch.
FederationResult run_federation(std::vector<ClientState> clients, const FederationOptions& options,
                                const gat::TrainConfig& cfg);

// run_federation with aggregation switched off.
FederationResult baseline_alone(std::vector<ClientState> clients, const gat::TrainConfig& cfg,
                                const std::string& run_id = {});

struct FullBaseline {
  gat::ModelParams params;
  ClientOutcome global;  // on the whole graph's validation and test nodes
  // Per client, the global model evaluated on the client's graph and test nodes.
  std::vector<ClientOutcome> per_client;
};

// One model trained on `global`'s training nodes from `init`; the
// checkpoint chosen by global validation accuracy (and the final one) are
// evaluated on every client's test nodes.
FullBaseline baseline_full(std::shared_ptr<const graph::Graph> global,
                           const std::vector<ClientState>& clients, const gat::ModelParams& init,
                           const gat::TrainConfig& cfg, std::uint64_t dropout_seed = 0);

// Clients with identical initial parameters (the server's broadcast).
std::vector<ClientState> make_clients(const std::vector<graph::Graph>& graphs,
                                      const gat::ModelParams& init);

std::string to_string(Phase phase);

}  // namespace flgnn::federation
