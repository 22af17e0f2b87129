#include "flgnn/graph/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "flgnn/random.hpp"

namespace flgnn::graph {

void SyntheticSpec::validate() const {
  if (n_nodes == 0 || n_classes == 0 || feature_dim == 0) {
    throw std::invalid_argument("synthetic graph needs nodes, classes and features");
  }
  if (edge_types == 0) throw std::invalid_argument("edge_types must be at least 1");
  if (!type_probabilities.empty() && type_probabilities.size() != edge_types) {
    throw std::invalid_argument("type_probabilities must list one entry per edge type");
  }
  if (!class_weights.empty() && class_weights.size() != n_classes) {
    throw std::invalid_argument("class_weights must list one weight per class");
  }
  for (std::size_t t = 0; t < edge_types; ++t) {
    const auto p = probabilities_for_type(t);
    if (!(p.intra >= 0.0 && p.intra <= 1.0 && p.inter >= 0.0 && p.inter <= 1.0)) {
      throw std::invalid_argument("edge probabilities must lie in [0, 1]");
    }
    if (p.intra < p.inter) {
      throw std::invalid_argument("edge type " + std::to_string(t) +
                                  ": intra-class probability below inter-class probability");
    }
  }
  if (feature_model == FeatureModel::bag_of_words) {
    if (words_per_node == 0 || words_per_node > feature_dim) {
      throw std::invalid_argument("words_per_node must lie in [1, feature_dim]");
    }
    if (!(topic_fraction >= 0.0 && topic_fraction <= 1.0)) {
      throw std::invalid_argument("topic_fraction must lie in [0, 1]");
    }
  }
}

EdgeProbabilities SyntheticSpec::probabilities_for_type(std::size_t type) const {
  if (type_probabilities.empty()) return {intra_class_edge_prob, inter_class_edge_prob};
  return type_probabilities.at(type);
}

std::vector<std::size_t> class_sizes_for(std::size_t n, const std::vector<double>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> sizes(weights.size());
  std::vector<double> fraction(weights.size());
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    const double ideal = static_cast<double>(n) * weights[c] / total;
    sizes[c] = static_cast<std::size_t>(std::floor(ideal));
    fraction[c] = ideal - std::floor(ideal);
    assigned += sizes[c];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fraction[a] > fraction[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % order.size()]];
  return sizes;
}

EdgeProbabilities edge_probabilities_for(const std::vector<std::size_t>& class_sizes,
                                         double expected_edges, double homophily) {
  double same = 0.0;
  double n = 0.0;
  for (std::size_t s : class_sizes) {
    same += 0.5 * static_cast<double>(s) * (static_cast<double>(s) - 1.0);
    n += static_cast<double>(s);
  }
  const double all = 0.5 * n * (n - 1.0);
  return {homophily * expected_edges / same, (1.0 - homophily) * expected_edges / (all - same)};
}

std::vector<Graph> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_nodes;
  const std::size_t classes = spec.n_classes;
  const std::size_t dim = spec.feature_dim;

  Rng label_rng = make_rng(spec.seed, "synthetic-labels");
  const auto sizes = class_sizes_for(
      n, spec.class_weights.empty() ? std::vector<double>(classes, 1.0) : spec.class_weights);
  std::vector<int> labels;
  labels.reserve(n);
  for (std::size_t c = 0; c < classes; ++c) labels.insert(labels.end(), sizes[c], static_cast<int>(c));
  std::shuffle(labels.begin(), labels.end(), label_rng);

  Graph base;
  base.labels = labels;
  for (std::size_t i = 0; i < n; ++i) base.node_ids.push_back("n" + std::to_string(i));
  for (std::size_t c = 0; c < classes; ++c) base.class_names.push_back("c" + std::to_string(c));
  for (std::size_t d = 0; d < dim; ++d) base.feature_names.push_back("f" + std::to_string(d));
  base.features = numerics::Matrix(n, dim);

  Rng feature_rng = make_rng(spec.seed, "synthetic-features");
  if (spec.feature_model == FeatureModel::gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    numerics::Matrix means(classes, dim);
    for (double& v : means.values()) v = spec.feature_signal * normal(feature_rng);
    for (std::size_t i = 0; i < n; ++i) {
      const auto mean = means.row(static_cast<std::size_t>(labels[i]));
      for (std::size_t d = 0; d < dim; ++d) {
        base.features(i, d) = mean[d] + spec.feature_noise * normal(feature_rng);
      }
    }
  } else {
    const std::size_t topic_size =
        spec.topic_words != 0 ? std::min(spec.topic_words, dim) : std::max<std::size_t>(1, dim / classes);
    std::vector<std::vector<std::size_t>> topics(classes);
    std::vector<std::size_t> vocabulary(dim);
    std::iota(vocabulary.begin(), vocabulary.end(), std::size_t{0});
    for (auto& topic : topics) {
      std::shuffle(vocabulary.begin(), vocabulary.end(), feature_rng);
      topic.assign(vocabulary.begin(), vocabulary.begin() + static_cast<std::ptrdiff_t>(topic_size));
    }
    std::uniform_int_distribution<std::size_t> any_word(0, dim - 1);
    std::uniform_int_distribution<std::size_t> topic_word(0, topic_size - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& topic = topics[static_cast<std::size_t>(labels[i])];
      std::size_t placed = 0;
      while (placed < spec.words_per_node) {
        const std::size_t word = uniform01(feature_rng) < spec.topic_fraction
                                     ? topic[topic_word(feature_rng)]
                                     : any_word(feature_rng);
        if (base.features(i, word) == 0.0) {
          base.features(i, word) = 1.0;
          ++placed;
        }
      }
    }
  }

  std::vector<Graph> graphs;
  for (std::size_t t = 0; t < spec.edge_types; ++t) {
    const auto p = spec.probabilities_for_type(t);
    Rng edge_rng = make_rng(spec.seed, "synthetic-edges", t);
    Graph g = base;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double prob = labels[i] == labels[j] ? p.intra : p.inter;
        if (uniform01(edge_rng) < prob) g.edges.push_back({i, j});
      }
    }
    graphs.push_back(std::move(g));
  }
  return graphs;
}

SyntheticSpec cora_like_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_nodes = 2708;
  spec.n_classes = 7;
  spec.feature_dim = 1433;
  spec.class_weights = {351, 217, 418, 818, 426, 298, 180};
  const auto p = edge_probabilities_for(class_sizes_for(spec.n_nodes, spec.class_weights), 5278, 0.81);
  spec.intra_class_edge_prob = p.intra;
  spec.inter_class_edge_prob = p.inter;
  spec.feature_model = FeatureModel::bag_of_words;
  spec.words_per_node = 18;
  spec.topic_fraction = 0.3;
  spec.topic_words = 120;
  spec.seed = seed;
  return spec;
}

SyntheticSpec citeseer_like_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_nodes = 3327;
  spec.n_classes = 6;
  spec.feature_dim = 3703;
  spec.class_weights = {264, 590, 668, 701, 596, 508};
  const auto p = edge_probabilities_for(class_sizes_for(spec.n_nodes, spec.class_weights), 4552, 0.74);
  spec.intra_class_edge_prob = p.intra;
  spec.inter_class_edge_prob = p.inter;
  spec.feature_model = FeatureModel::bag_of_words;
  spec.words_per_node = 32;
  spec.topic_fraction = 0.25;
  spec.topic_words = 300;
  spec.seed = seed;
  return spec;
}

}  // namespace flgnn::graph
