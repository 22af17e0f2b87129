#pragma once

#include <cstdint>
#include <vector>

#include "flgnn/graph/graph.hpp"

namespace flgnn::graph {

enum class FeatureModel {
  // class mean vector + isotropic Gaussian noise
  gaussian,
  // sparse binary bag of words; each class prefers its own topic words
  bag_of_words,
};

struct EdgeProbabilities {
  double intra = 0.0;  // same-class pair
  double inter = 0.0;  // different-class pair
};

struct SyntheticSpec {
  std::size_t n_nodes = 200;
  std::size_t n_classes = 4;
  std::size_t feature_dim = 16;
  double intra_class_edge_prob = 0.05;
  double inter_class_edge_prob = 0.005;
  std::size_t edge_types = 1;
  // Per-type probabilities; empty means every type uses the pair above.
  std::vector<EdgeProbabilities> type_probabilities;
  // Relative class sizes; empty means balanced.
  std::vector<double> class_weights;

  FeatureModel feature_model = FeatureModel::gaussian;
  double feature_signal = 1.0;  // gaussian: scale of class means
  double feature_noise = 1.0;   // gaussian: noise standard deviation
  std::size_t words_per_node = 18;
  double topic_fraction = 0.5;   // bag of words: share of words drawn from the class topic
  std::size_t topic_words = 0;   // bag of words: topic size (0 = feature_dim / n_classes)

  std::uint64_t seed = 0;

  // Throws std::invalid_argument; requires intra >= inter for every type.
  void validate() const;
  EdgeProbabilities probabilities_for_type(std::size_t type) const;
};

// `edge_types` graphs over one shared node set, labels and features; each
// type draws its own edges independently with its own probabilities.
std::vector<Graph> generate_synthetic(const SyntheticSpec& spec);

// Same-class/different-class edge probabilities that give `expected_edges`
// edges of which a `homophily` fraction join same-class nodes.
EdgeProbabilities edge_probabilities_for(const std::vector<std::size_t>& class_sizes,
                                         double expected_edges, double homophily);

// Class sizes for `n` nodes split by `weights` (largest remainder).
std::vector<std::size_t> class_sizes_for(std::size_t n, const std::vector<double>& weights);

// Stand-ins with the size, sparsity, class balance and homophily of the
// Cora and Citeseer citation graphs.
SyntheticSpec cora_like_spec(std::uint64_t seed);
SyntheticSpec citeseer_like_spec(std::uint64_t seed);

}  // namespace flgnn::graph
