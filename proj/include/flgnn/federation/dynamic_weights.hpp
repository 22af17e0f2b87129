#pragma once

#include <cstddef>
#include <vector>

#include "flgnn/federation/plan.hpp"
#include "flgnn/gat/params.hpp"
#include "flgnn/numerics/matrix.hpp"

namespace flgnn::federation {

// Per-client aggregation weights adjusted by validation-accuracy feedback.
// Row u of gamma is the blend client u applies; gamma(u, u) is its self-weight.
struct DynamicWeights {
  numerics::Matrix gamma;
  double eta = 0.05;
  double l_up = 0.9;
  std::vector<int> mu;  // last adjustment factor per client, 0 or 1

  // Uniform 1/N rows.
  static DynamicWeights uniform(std::size_t n_clients, double eta = 0.05, double l_up = 0.9);

  std::size_t clients() const noexcept { return gamma.rows(); }
  // Throws std::invalid_argument: square gamma, rows summing to 1 (1e-9),
  // entries in [0, 1], eta >= 0, l_up in (1/N, 1] for N > 1.
  void validate() const;
};

// mu = 1 iff acc_curr - acc_prev <= 0 and gamma(u, u) < l_up. Then the
// self-weight grows by mu * eta (capped at l_up) and the rest of row u is
// split equally, (1 - gamma(u, u)) / (N - 1). Rows with mu * eta == 0 are
// left exactly as they were. N == 1 is a no-op.
DynamicWeights flgnn_plus_update(DynamicWeights dw, std::size_t u, double acc_prev, double acc_curr);

std::vector<gat::ModelParams> flgnn_plus_aggregate(const std::vector<gat::ModelParams>& params_all,
                                                   const DynamicWeights& dw,
                                                   const AggregationPlan& plan);

}  // namespace flgnn::federation
