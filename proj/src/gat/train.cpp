#include "flgnn/gat/train.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "flgnn/error.hpp"

namespace flgnn::gat {

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("lr must be a finite value >= 0");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw std::invalid_argument("l2 must be a finite value >= 0");
  if (nhid == 0 || nhead == 0) throw std::invalid_argument("nhid and nhead must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) {
    throw std::invalid_argument("leaky_slope must lie in (0, 1)");
  }
}

ModelDims TrainConfig::dims_for(const graph::Graph& g) const {
  return {g.feature_dim(), nhid, nhead, g.class_count()};
}

AdamOptimizer::AdamOptimizer(const ModelParams& shape, double lr, double beta1, double beta2,
                             double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(zeros_like(shape)), v_(zeros_like(shape)) {}

void AdamOptimizer::step(ModelParams& params, const ModelParams& gradient) {
  if (!same_shape(params, m_) || !same_shape(params, gradient)) {
    throw DimensionError("optimizer state does not match the parameter shapes");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    auto& layer = params.layers[l];
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
      auto update = [&](std::span<double> p, std::span<const double> g, std::span<double> m,
                        std::span<double> v) {
        for (std::size_t k = 0; k < p.size(); ++k) {
          m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
          v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
          p[k] -= lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
        }
      };
      auto& ph = layer.heads[h];
      const auto& gh = gradient.layers[l].heads[h];
      auto& mh = m_.layers[l].heads[h];
      auto& vh = v_.layers[l].heads[h];
      update(ph.weight.values(), gh.weight.values(), mh.weight.values(), vh.weight.values());
      update(ph.attention, gh.attention, mh.attention, vh.attention);
    }
  }
}

namespace {

bool all_finite(const ModelParams& params) {
  bool ok = true;
  for_each_tensor(params, [&](std::size_t, std::span<const double> v) {
    for (double x : v) ok = ok && std::isfinite(x);
  });
  return ok;
}

}  // namespace

EpochResult train_epoch(ModelParams& params, AdamOptimizer& optimizer, const graph::Graph& g,
                        const Adjacency& adjacency, const TrainConfig& cfg, std::size_t epoch,
                        Rng* dropout_rng) {
  const auto train = g.train_nodes();
  if (train.empty()) throw EmptyMaskError("training mask is empty");
  ForwardOptions options;
  options.leaky_slope = cfg.leaky_slope;
  options.dropout = cfg.dropout;
  options.rng = dropout_rng;
  LossGradient lg = loss_and_gradient(params, g.features, adjacency, g.labels, train, cfg.l2, options);
  if (!std::isfinite(lg.loss)) throw DivergenceError(epoch);
  optimizer.step(params, lg.gradient);
  if (!all_finite(params)) throw DivergenceError(epoch);

  EpochResult result;
  result.loss = lg.loss;
  result.data_loss = lg.data_loss;
  const auto val = g.validation_nodes();
  const auto test = g.test_nodes();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const numerics::Matrix probs = model_forward(params, g.features, adjacency, cfg.leaky_slope);
  result.val_accuracy = val.empty() ? nan : accuracy(probs, g.labels, val);
  result.test_accuracy = test.empty() ? nan : accuracy(probs, g.labels, test);
  return result;
}

LocalTrainer::LocalTrainer(std::shared_ptr<const graph::Graph> g, ModelParams init,
                           const TrainConfig& cfg, std::uint64_t dropout_seed)
    : graph_(std::move(g)),
      adjacency_(build_adjacency(*graph_)),
      cfg_(cfg),
      params_(std::move(init)),
      optimizer_(params_, cfg.lr),
      dropout_rng_(dropout_seed),
      train_nodes_(graph_->train_nodes()),
      validation_nodes_(graph_->validation_nodes()),
      test_nodes_(graph_->test_nodes()) {
  cfg_.validate();
  validate_params(params_);
  if (params_.layers[0].in_dim != graph_->feature_dim()) {
    throw DimensionError("model input width " + std::to_string(params_.layers[0].in_dim) +
                         " != feature width " + std::to_string(graph_->feature_dim()));
  }
}

EpochResult LocalTrainer::train_epoch() {
  ++epoch_;
  if (train_nodes_.empty()) throw EmptyMaskError("training mask is empty");
  ForwardOptions options;
  options.leaky_slope = cfg_.leaky_slope;
  options.dropout = cfg_.dropout;
  options.rng = &dropout_rng_;
  LossGradient lg = loss_and_gradient(params_, graph_->features, adjacency_, graph_->labels,
                                      train_nodes_, cfg_.l2, options);
  if (!std::isfinite(lg.loss)) throw DivergenceError(epoch_);
  optimizer_.step(params_, lg.gradient);
  if (!all_finite(params_)) throw DivergenceError(epoch_);
  EpochResult result;
  result.loss = lg.loss;
  result.data_loss = lg.data_loss;
  const numerics::Matrix probs = predict();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  result.val_accuracy = validation_nodes_.empty() ? nan : accuracy(probs, graph_->labels, validation_nodes_);
  result.test_accuracy = test_nodes_.empty() ? nan : accuracy(probs, graph_->labels, test_nodes_);
  return result;
}

numerics::Matrix LocalTrainer::predict() const {
  return model_forward(params_, graph_->features, adjacency_, cfg_.leaky_slope);
}

double LocalTrainer::accuracy_on(std::span<const std::size_t> mask) const {
  return accuracy(predict(), graph_->labels, mask);
}

numerics::GradCheckResult check_model_gradient(const ModelParams& params, const graph::Graph& g,
                                               double l2, double step, std::size_t sample,
                                               std::uint64_t seed) {
  const Adjacency adj = build_adjacency(g);
  const auto train = g.train_nodes();
  const LossGradient lg = loss_and_gradient(params, g.features, adj, g.labels, train, l2);
  const auto flat = flatten(params);
  const auto analytic = flatten(lg.gradient);
  ModelParams scratch = params;
  auto loss = [&](std::span<const double> x) {
    unflatten(x, scratch);
    return training_loss(scratch, g.features, adj, g.labels, train, l2);
  };
  return numerics::finite_difference_check(loss, flat, analytic, step, sample, seed);
}

}  // namespace flgnn::gat
