#include "flgnn/graph/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "flgnn/log.hpp"
#include "flgnn/random.hpp"

namespace flgnn::graph {
namespace {

// Largest-remainder apportionment of `total` units proportionally to
// `ideal`, never exceeding `capacity` per bucket.
std::vector<std::size_t> apportion(const std::vector<double>& ideal, std::size_t total,
                                   const std::vector<std::size_t>& capacity) {
  const std::size_t k = ideal.size();
  std::vector<std::size_t> out(k);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    out[c] = std::min(static_cast<std::size_t>(std::floor(ideal[c])), capacity[c]);
    assigned += out[c];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ideal[a] - std::floor(ideal[a]) > ideal[b] - std::floor(ideal[b]);
  });
  while (assigned < total) {
    bool progressed = false;
    for (std::size_t c : order) {
      if (assigned == total) break;
      if (out[c] < capacity[c]) {
        ++out[c];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) throw std::logic_error("apportion: capacity exhausted");
  }
  return out;
}

}  // namespace

SplitRatio SplitRatio::normalized() const {
  if (!(train > 0.0 && validation > 0.0 && test > 0.0)) {
    throw std::invalid_argument("split ratio components must be positive");
  }
  const double sum = train + validation + test;
  return {train / sum, validation / sum, test / sum};
}

Graph make_splits(const Graph& g, const SplitRatio& ratio, std::uint64_t seed) {
  const SplitRatio r = ratio.normalized();
  const std::size_t n = g.node_count();
  const std::size_t classes = g.class_count();

  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(g.labels[i])].push_back(i);
  std::vector<std::size_t> sizes(classes);
  for (std::size_t c = 0; c < classes; ++c) sizes[c] = members[c].size();

  const auto round_count = [n](double fraction) {
    return std::min(n, static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction)));
  };
  const std::size_t n_train = round_count(r.train);
  const std::size_t n_val = std::min(n - n_train, round_count(r.validation));

  std::vector<double> ideal_train(classes), ideal_val(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    const double share = n == 0 ? 0.0 : static_cast<double>(sizes[c]) / static_cast<double>(n);
    ideal_train[c] = share * static_cast<double>(n_train);
    ideal_val[c] = share * static_cast<double>(n_val);
  }
  std::vector<std::size_t> train = apportion(ideal_train, n_train, sizes);

  // Give every present class a training node, borrowing from the largest.
  std::size_t present = 0;
  for (std::size_t s : sizes) present += s > 0 ? 1 : 0;
  bool missing = false;
  for (std::size_t c = 0; c < classes; ++c) {
    if (sizes[c] == 0 || train[c] > 0) continue;
    auto donor = std::max_element(train.begin(), train.end());
    if (n_train >= present && donor != train.end() && *donor > 1) {
      --*donor;
      ++train[c];
    } else {
      missing = true;
    }
  }
  if (missing) {
    warn("training split cannot contain every class (" + std::to_string(n_train) +
         " training nodes for " + std::to_string(present) + " classes)");
  }

  std::vector<std::size_t> remaining(classes);
  for (std::size_t c = 0; c < classes; ++c) remaining[c] = sizes[c] - train[c];
  const std::vector<std::size_t> val = apportion(ideal_val, n_val, remaining);

  Graph out = g;
  out.roles.assign(n, Role::test);
  Rng rng(seed);
  for (std::size_t c = 0; c < classes; ++c) {
    auto nodes = members[c];
    std::shuffle(nodes.begin(), nodes.end(), rng);
    for (std::size_t k = 0; k < train[c]; ++k) out.roles[nodes[k]] = Role::train;
    for (std::size_t k = train[c]; k < train[c] + val[c]; ++k) out.roles[nodes[k]] = Role::validation;
  }
  return out;
}

}  // namespace flgnn::graph
