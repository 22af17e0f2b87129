#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "flgnn/gat/params.hpp"
#include "flgnn/graph/graph.hpp"
#include "flgnn/numerics/matrix.hpp"
#include "flgnn/numerics/ops.hpp"
#include "flgnn/random.hpp"

namespace flgnn::gat {

// Neighbourhoods in CSR form; row i lists N(i) in ascending order and, when
// built with self-loops, includes i itself.
struct Adjacency {
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> neighbors;

  std::size_t node_count() const noexcept { return offsets.size() - 1; }
  std::span<const std::size_t> row(std::size_t i) const {
    return {neighbors.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
};

Adjacency build_adjacency(std::size_t node_count, std::span<const graph::Edge> edges,
                          bool self_loops = true);
inline Adjacency build_adjacency(const graph::Graph& g) {
  return build_adjacency(g.node_count(), g.edges, true);
}

// Dense k x k matrix of attention weights alpha_ij for one head; zero outside
// each neighbourhood. Throws DegenerateNeighborhoodError for an empty row.
numerics::Matrix attention_coefficients(const numerics::Matrix& h, const GatLayerParams& layer,
                                        std::size_t head, const Adjacency& adjacency,
                                        double leaky_slope = numerics::kDefaultLeakySlope);

// One attention layer: per head, sum_j alpha_ij W h_j; hidden layers apply
// ELU and concatenate heads, the output layer applies a row softmax.
numerics::Matrix layer_forward(const numerics::Matrix& h, const GatLayerParams& layer,
                               const Adjacency& adjacency,
                               double leaky_slope = numerics::kDefaultLeakySlope);

// Class probabilities (node_count x n_classes), no dropout.
numerics::Matrix model_forward(const ModelParams& params, const numerics::Matrix& features,
                               const Adjacency& adjacency,
                               double leaky_slope = numerics::kDefaultLeakySlope);
numerics::Matrix model_forward(const ModelParams& params, const graph::Graph& g,
                               double leaky_slope = numerics::kDefaultLeakySlope);

struct ForwardOptions {
  double leaky_slope = numerics::kDefaultLeakySlope;
  // Inverted dropout on every layer input; needs `rng` when positive.
  double dropout = 0.0;
  Rng* rng = nullptr;
};

struct LossGradient {
  double loss = 0.0;          // data loss + l2 * ||params||^2
  double data_loss = 0.0;     // mean cross-entropy over the training nodes
  ModelParams gradient;       // same shapes as the parameters
  numerics::Matrix probabilities;
};

// Full-batch loss and its analytic gradient (hand-derived backward pass of
// the fixed architecture).
LossGradient loss_and_gradient(const ModelParams& params, const numerics::Matrix& features,
                               const Adjacency& adjacency, std::span<const int> labels,
                               std::span<const std::size_t> train_nodes, double l2,
                               const ForwardOptions& options = {});

// The loss alone, without dropout; the function finite differences probe.
double training_loss(const ModelParams& params, const numerics::Matrix& features,
                     const Adjacency& adjacency, std::span<const int> labels,
                     std::span<const std::size_t> train_nodes, double l2,
                     double leaky_slope = numerics::kDefaultLeakySlope);

// Fraction of `mask` whose argmax (lowest index on ties) equals the label.
// Throws EmptyMaskError for an empty mask.
double accuracy(const numerics::Matrix& probabilities, std::span<const int> labels,
                std::span<const std::size_t> mask);
double evaluate(const ModelParams& params, const graph::Graph& g,
                std::span<const std::size_t> mask);

std::size_t argmax_row(std::span<const double> row);

}  // namespace flgnn::gat
