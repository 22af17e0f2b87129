#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flgnn/gat/params.hpp"
#include "flgnn/graph/graph.hpp"
#include "flgnn/graph/splits.hpp"
#include "flgnn/numerics/matrix.hpp"
#include "flgnn/random.hpp"

namespace fixtures {

inline flgnn::numerics::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                             double scale = 1.0) {
  flgnn::Rng rng(seed);
  flgnn::numerics::Matrix m(rows, cols);
  for (double& v : m.values()) v = scale * (2.0 * flgnn::uniform01(rng) - 1.0);
  return m;
}

// Small random graph with every node labelled and split 40/30/30.
inline flgnn::graph::Graph random_graph(std::size_t n, std::size_t features, std::size_t classes,
                                        double edge_prob, std::uint64_t seed) {
  flgnn::Rng rng(seed);
  flgnn::graph::Graph g;
  for (std::size_t i = 0; i < n; ++i) g.node_ids.push_back("n" + std::to_string(i));
  for (std::size_t f = 0; f < features; ++f) g.feature_names.push_back("f" + std::to_string(f));
  for (std::size_t c = 0; c < classes; ++c) g.class_names.push_back("c" + std::to_string(c));
  g.features = random_matrix(n, features, seed + 1);
  for (std::size_t i = 0; i < n; ++i) g.labels.push_back(static_cast<int>(i % classes));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (flgnn::uniform01(rng) < edge_prob) pairs.emplace_back(i, j);
    }
  }
  g.edges = flgnn::graph::canonicalize_edges(pairs);
  return flgnn::graph::make_splits(g, {0.4, 0.3, 0.3}, seed + 2);
}

inline double max_abs_diff(const flgnn::numerics::Matrix& a, const flgnn::numerics::Matrix& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, std::abs(a.values()[k] - b.values()[k]));
  }
  return worst;
}

inline double max_abs_diff(const flgnn::gat::ModelParams& a, const flgnn::gat::ModelParams& b) {
  const auto fa = flgnn::gat::flatten(a);
  const auto fb = flgnn::gat::flatten(b);
  double worst = 0.0;
  for (std::size_t k = 0; k < fa.size(); ++k) worst = std::max(worst, std::abs(fa[k] - fb[k]));
  return worst;
}

}  // namespace fixtures
