#include "flgnn/federation/dynamic_weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "flgnn/federation/aggregate.hpp"

namespace flgnn::federation {

DynamicWeights DynamicWeights::uniform(std::size_t n_clients, double eta, double l_up) {
  if (n_clients == 0) throw std::invalid_argument("dynamic weights need at least one client");
  DynamicWeights dw;
  dw.gamma = uniform_weights(n_clients);
  dw.eta = eta;
  dw.l_up = l_up;
  dw.mu.assign(n_clients, 0);
  dw.validate();
  return dw;
}

void DynamicWeights::validate() const {
  const std::size_t n = gamma.rows();
  if (n == 0 || gamma.cols() != n) throw std::invalid_argument("gamma must be a non-empty square matrix");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be >= 0");
  if (!(l_up > 0.0 && l_up <= 1.0)) throw std::invalid_argument("l_up must lie in (0, 1]");
  if (n > 1 && !(l_up > 1.0 / static_cast<double>(n))) {
    throw std::invalid_argument("l_up must exceed 1/N");
  }
  if (!mu.empty() && mu.size() != n) throw std::invalid_argument("mu must hold one entry per client");
  for (std::size_t u = 0; u < n; ++u) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double g = gamma(u, k);
      if (!(g >= 0.0 && g <= 1.0)) {
        throw std::invalid_argument("gamma(" + std::to_string(u) + ", " + std::to_string(k) +
                                    ") outside [0, 1]");
      }
      sum += g;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("gamma row " + std::to_string(u) + " sums to " + std::to_string(sum));
    }
  }
}

DynamicWeights flgnn_plus_update(DynamicWeights dw, std::size_t u, double acc_prev, double acc_curr) {
  const std::size_t n = dw.clients();
  if (u >= n) throw std::invalid_argument("client index out of range");
  if (dw.mu.size() != n) dw.mu.assign(n, 0);
  if (n == 1) return dw;
  const double self = dw.gamma(u, u);
  const int mu = (acc_curr - acc_prev <= 0.0 && self < dw.l_up) ? 1 : 0;
  dw.mu[u] = mu;
  if (mu == 0 || dw.eta == 0.0) return dw;
  const double updated = std::min(self + dw.eta, dw.l_up);
  const double other = (1.0 - updated) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) dw.gamma(u, k) = k == u ? updated : other;
  return dw;
}

std::vector<gat::ModelParams> flgnn_plus_aggregate(const std::vector<gat::ModelParams>& params_all,
                                                   const DynamicWeights& dw,
                                                   const AggregationPlan& plan) {
  return weighted_aggregate(params_all, dw.gamma, plan);
}

}  // namespace flgnn::federation
