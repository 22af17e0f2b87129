#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "flgnn/federation/plan.hpp"
#include "flgnn/gat/params.hpp"
#include "flgnn/numerics/matrix.hpp"

namespace flgnn::federation {

// What a client uploads: copies of its shared layers (W and a of every head)
// and nothing else. The server only ever sees these records.
struct ParameterRecord {
  std::string client;
  std::array<std::optional<gat::GatLayerParams>, gat::kLayerCount> layers;

  friend bool operator==(const ParameterRecord&, const ParameterRecord&) = default;
};

ParameterRecord extract_shared(const gat::ModelParams& params, const AggregationPlan& plan,
                               const std::string& client);

// Overwrites the layers present in `record`; other layers stay untouched.
void install_shared(gat::ModelParams& params, const ParameterRecord& record);

// Server side. Row u of `gamma` gives the weights client u applies to every
// upload; the result for u is sum_n gamma(u, n) * upload_n per shared layer.
// Throws AggregationError when uploads disagree on layers or shapes.
std::vector<ParameterRecord> combine_uploads(const std::vector<ParameterRecord>& uploads,
                                             const numerics::Matrix& gamma);

// N x N matrix with every entry 1/N.
numerics::Matrix uniform_weights(std::size_t n);

// Every client's shared layers replaced by the unweighted mean over clients.
std::vector<gat::ModelParams> fedavg_aggregate(const std::vector<gat::ModelParams>& params_all,
                                               const AggregationPlan& plan);

// Client u's shared layers become the gamma row u blend of all clients.
std::vector<gat::ModelParams> weighted_aggregate(const std::vector<gat::ModelParams>& params_all,
                                                 const numerics::Matrix& gamma,
                                                 const AggregationPlan& plan);

// Bytes one client uploads per aggregation event (8 bytes per parameter).
std::size_t bytes_shared(const AggregationPlan& plan, const gat::ModelDims& dims);

}  // namespace flgnn::federation
