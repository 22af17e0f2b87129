#pragma once

#include <cstdint>

#include "flgnn/graph/graph.hpp"

namespace flgnn::graph {

// Relative sizes of the train / validation / test sets; normalised on use,
// so {1, 2, 7} and {0.1, 0.2, 0.7} are equivalent.
struct SplitRatio {
  double train = 1.0;
  double validation = 2.0;
  double test = 7.0;

  // Throws std::invalid_argument unless every component is positive.
  SplitRatio normalized() const;
};

// Assigns every node a role. Totals are round(n * ratio) for train and
// validation (test takes the rest); each class receives its share by largest
// remainder, so per-class counts are within one node of the exact fraction.
// When possible every class gets at least one training node; otherwise a
// warning is emitted through flgnn::warn. Deterministic in `seed`.
Graph make_splits(const Graph& g, const SplitRatio& ratio, std::uint64_t seed);

}  // namespace flgnn::graph
