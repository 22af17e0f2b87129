#include "flgnn/federation/aggregate.hpp"

#include <algorithm>
#include <string>

#include "flgnn/error.hpp"

namespace flgnn::federation {

ParameterRecord extract_shared(const gat::ModelParams& params, const AggregationPlan& plan,
                               const std::string& client) {
  plan.validate();
  ParameterRecord record;
  record.client = client;
  for (std::size_t l : plan.shared_layers()) record.layers[l] = params.layers[l];
  return record;
}

void install_shared(gat::ModelParams& params, const ParameterRecord& record) {
  for (std::size_t l = 0; l < gat::kLayerCount; ++l) {
    if (!record.layers[l]) continue;
    if (!gat::same_shape(params.layers[l], *record.layers[l])) {
      throw AggregationError("record from client " + record.client + " does not fit layer " +
                             std::to_string(l + 1));
    }
    params.layers[l] = *record.layers[l];
  }
}

numerics::Matrix uniform_weights(std::size_t n) {
  return numerics::Matrix(n, n, 1.0 / static_cast<double>(n));
}

std::vector<ParameterRecord> combine_uploads(const std::vector<ParameterRecord>& uploads,
                                             const numerics::Matrix& gamma) {
  const std::size_t n = uploads.size();
  if (n == 0) throw AggregationError("no uploads to aggregate");
  if (gamma.rows() != n || gamma.cols() != n) {
    throw AggregationError("weight matrix " + gamma.shape() + " does not match " +
                           std::to_string(n) + " clients");
  }
  const auto& first = uploads.front();
  for (const auto& up : uploads) {
    for (std::size_t l = 0; l < gat::kLayerCount; ++l) {
      if (up.layers[l].has_value() != first.layers[l].has_value()) {
        throw AggregationError("client " + up.client + " and client " + first.client +
                               " share different layers (layer " + std::to_string(l + 1) + ")");
      }
      if (up.layers[l] && !gat::same_shape(*up.layers[l], *first.layers[l])) {
        throw AggregationError("client " + up.client + " layer " + std::to_string(l + 1) +
                               " has a different shape from client " + first.client);
      }
      if (up.layers[l]) {
        for (std::size_t h = 0; h < up.layers[l]->heads.size(); ++h) {
          const auto& a = up.layers[l]->heads[h];
          const auto& b = first.layers[l]->heads[h];
          if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() ||
              a.attention.size() != b.attention.size()) {
            throw AggregationError("client " + up.client + " layer " + std::to_string(l + 1) +
                                   " head " + std::to_string(h) + " has a different shape");
          }
        }
      }
    }
  }

  std::vector<ParameterRecord> out(n);
  for (std::size_t u = 0; u < n; ++u) {
    out[u].client = uploads[u].client;
    for (std::size_t l = 0; l < gat::kLayerCount; ++l) {
      if (!first.layers[l]) continue;
      gat::GatLayerParams layer = *first.layers[l];
      for (std::size_t h = 0; h < layer.heads.size(); ++h) {
        auto w = layer.heads[h].weight.values();
        auto& a = layer.heads[h].attention;
        std::fill(w.begin(), w.end(), 0.0);
        std::fill(a.begin(), a.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
          const double g = gamma(u, k);
          const auto& src = uploads[k].layers[l]->heads[h];
          const auto sw = src.weight.values();
          for (std::size_t i = 0; i < w.size(); ++i) w[i] += g * sw[i];
          for (std::size_t i = 0; i < a.size(); ++i) a[i] += g * src.attention[i];
        }
      }
      out[u].layers[l] = std::move(layer);
    }
  }
  return out;
}

std::vector<gat::ModelParams> weighted_aggregate(const std::vector<gat::ModelParams>& params_all,
                                                 const numerics::Matrix& gamma,
                                                 const AggregationPlan& plan) {
  plan.validate();
  std::vector<ParameterRecord> uploads;
  uploads.reserve(params_all.size());
  for (std::size_t u = 0; u < params_all.size(); ++u) {
    if (u > 0 && !gat::same_shape(params_all[u], params_all[0])) {
      for (std::size_t l = 0; l < gat::kLayerCount; ++l) {
        if (!gat::same_shape(params_all[u].layers[l], params_all[0].layers[l])) {
          throw AggregationError("client " + std::to_string(u) + " layer " + std::to_string(l + 1) +
                                 " has a different shape from client 0");
        }
      }
    }
    uploads.push_back(extract_shared(params_all[u], plan, std::to_string(u)));
  }
  const auto combined = combine_uploads(uploads, gamma);
  std::vector<gat::ModelParams> out = params_all;
  for (std::size_t u = 0; u < out.size(); ++u) install_shared(out[u], combined[u]);
  return out;
}

std::vector<gat::ModelParams> fedavg_aggregate(const std::vector<gat::ModelParams>& params_all,
                                               const AggregationPlan& plan) {
  return weighted_aggregate(params_all, uniform_weights(params_all.size()), plan);
}

std::size_t bytes_shared(const AggregationPlan& plan, const gat::ModelDims& dims) {
  plan.validate();
  const std::size_t hidden = dims.nhid * dims.nhead;
  const std::array<std::size_t, 3> in{dims.n_features, hidden, hidden};
  const std::array<std::size_t, 3> out{dims.nhid, dims.nhid, dims.n_classes};
  const std::array<std::size_t, 3> heads{dims.nhead, dims.nhead, 1};
  std::size_t count = 0;
  for (std::size_t l : plan.shared_layers()) count += heads[l] * (in[l] * out[l] + 2 * out[l]);
  return count * sizeof(double);
}

}  // namespace flgnn::federation
