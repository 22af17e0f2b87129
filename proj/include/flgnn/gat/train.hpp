#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>

#include "flgnn/gat/model.hpp"
#include "flgnn/gat/params.hpp"
#include "flgnn/graph/graph.hpp"
#include "flgnn/numerics/gradcheck.hpp"
#include "flgnn/random.hpp"

namespace flgnn::gat {

struct TrainConfig {
  double lr = 0.005;
  double l2 = 0.0005;
  std::size_t nhid = 8;
  std::size_t nhead = 8;
  std::size_t max_epoch = 200;
  double dropout = 0.0;
  std::uint64_t seed = 0;
  double leaky_slope = numerics::kDefaultLeakySlope;

  // Throws std::invalid_argument.
  void validate() const;
  ModelDims dims_for(const graph::Graph& g) const;
};

// Adam with bias correction (beta1 0.9, beta2 0.999, eps 1e-8).
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(const ModelParams& shape, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  void step(ModelParams& params, const ModelParams& gradient);
  std::size_t steps() const noexcept { return t_; }
  double learning_rate() const noexcept { return lr_; }

 private:
  double lr_ = 0.0;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::size_t t_ = 0;
  ModelParams m_;
  ModelParams v_;
};

struct EpochResult {
  double loss = 0.0;       // regularised training loss before the step
  double data_loss = 0.0;
  // After the step; NaN when the mask is empty.
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

// One full-batch Adam step on `params`. Throws DivergenceError(epoch) when
// the loss or the updated parameters are not finite.
EpochResult train_epoch(ModelParams& params, AdamOptimizer& optimizer, const graph::Graph& g,
                        const Adjacency& adjacency, const TrainConfig& cfg, std::size_t epoch,
                        Rng* dropout_rng = nullptr);

// A client's model together with its optimiser state and cached adjacency.
class LocalTrainer {
 public:
  LocalTrainer(std::shared_ptr<const graph::Graph> g, ModelParams init, const TrainConfig& cfg,
               std::uint64_t dropout_seed = 0);

  EpochResult train_epoch();

  const ModelParams& params() const noexcept { return params_; }
  ModelParams& params() noexcept { return params_; }
  const graph::Graph& graph() const noexcept { return *graph_; }
  const Adjacency& adjacency() const noexcept { return adjacency_; }
  std::size_t epochs_done() const noexcept { return epoch_; }

  numerics::Matrix predict() const;
  double accuracy_on(std::span<const std::size_t> mask) const;

 private:
  std::shared_ptr<const graph::Graph> graph_;
  Adjacency adjacency_;
  TrainConfig cfg_;
  ModelParams params_;
  AdamOptimizer optimizer_;
  Rng dropout_rng_;
  std::vector<std::size_t> train_nodes_;
  std::vector<std::size_t> validation_nodes_;
  std::vector<std::size_t> test_nodes_;
  std::size_t epoch_ = 0;
};

// Finite-difference check of loss_and_gradient for every tensor of `params`
// on `g`'s training nodes (no dropout).
numerics::GradCheckResult check_model_gradient(const ModelParams& params, const graph::Graph& g,
                                               double l2, double step = 1e-5,
                                               std::size_t sample = 0, std::uint64_t seed = 0);

}  // namespace flgnn::gat
