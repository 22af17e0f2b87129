#include "flgnn/gat/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flgnn/error.hpp"

namespace flgnn::gat {
namespace {

using numerics::Matrix;

// Forward state of one layer kept for the backward pass. Head h occupies
// columns [h * out_dim, (h + 1) * out_dim) of `z` and `pre`.
struct LayerCache {
  const Matrix* input = nullptr;         // layer input after dropout
  Matrix dropped;                        // owns the input when dropout applied
  std::vector<double> dropout_scale;     // per input entry, empty without dropout
  Matrix weights;                        // heads' W side by side (in x heads*out)
  Matrix z;                              // input * weights
  std::vector<std::vector<double>> e;    // per head, CSR-aligned s_i + t_j
  std::vector<std::vector<double>> alpha;
  Matrix pre;                            // attention-weighted sums before activation
  Matrix output;
};

Matrix concat_weights(const GatLayerParams& layer) {
  const std::size_t width = layer.out_dim * layer.heads.size();
  Matrix w(layer.in_dim, width);
  for (std::size_t h = 0; h < layer.heads.size(); ++h) {
    const Matrix& wh = layer.heads[h].weight;
    for (std::size_t r = 0; r < layer.in_dim; ++r) {
      std::copy(wh.row(r).begin(), wh.row(r).end(), w.row(r).begin() + static_cast<std::ptrdiff_t>(h * layer.out_dim));
    }
  }
  return w;
}

void check_input(const Matrix& h, const GatLayerParams& layer, const Adjacency& adjacency) {
  if (h.cols() != layer.in_dim) {
    throw DimensionError("layer input has width " + std::to_string(h.cols()) + ", layer expects " +
                         std::to_string(layer.in_dim));
  }
  if (h.rows() != adjacency.node_count()) {
    throw DimensionError("layer input has " + std::to_string(h.rows()) + " rows for " +
                         std::to_string(adjacency.node_count()) + " nodes");
  }
}

// Attention logits and weights of head `h` over the CSR neighbourhoods.
void attend(const Matrix& z, const GatLayerParams& layer, std::size_t h, const Adjacency& adj,
            double slope, std::vector<double>& e, std::vector<double>& alpha) {
  const std::size_t out = layer.out_dim;
  const std::size_t col = h * out;
  const auto& a = layer.heads[h].attention;
  const std::size_t n = adj.node_count();
  std::vector<double> src(n), dst(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* zi = z.row(i).data() + col;
    double s = 0.0, t = 0.0;
    for (std::size_t d = 0; d < out; ++d) {
      s += a[d] * zi[d];
      t += a[out + d] * zi[d];
    }
    src[i] = s;
    dst[i] = t;
  }
  e.resize(adj.neighbors.size());
  alpha.resize(adj.neighbors.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t begin = adj.offsets[i], end = adj.offsets[i + 1];
    if (begin == end) {
      throw DegenerateNeighborhoodError("node " + std::to_string(i) +
                                        " has an empty attention neighbourhood");
    }
    for (std::size_t k = begin; k < end; ++k) {
      e[k] = src[i] + dst[adj.neighbors[k]];
      alpha[k] = numerics::leaky_relu(e[k], slope);
    }
    numerics::softmax_inplace(std::span(alpha).subspan(begin, end - begin));
  }
}

void attend_and_activate(const GatLayerParams& layer, const Adjacency& adj,
                         const ForwardOptions& options, LayerCache& cache);

void forward_layer(const Matrix& input, const GatLayerParams& layer, const Adjacency& adj,
                   const ForwardOptions& options, LayerCache& cache) {
  check_input(input, layer, adj);
  cache.input = &input;
  if (options.dropout > 0.0) {
    if (options.rng == nullptr) throw std::invalid_argument("dropout requires an rng");
    const double keep = 1.0 - options.dropout;
    cache.dropped = input;
    cache.input = &cache.dropped;
    cache.dropout_scale.resize(input.size());
    auto values = cache.dropped.values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double scale = uniform01(*options.rng) < keep ? 1.0 / keep : 0.0;
      cache.dropout_scale[k] = scale;
      values[k] *= scale;
    }
  }
  cache.weights = concat_weights(layer);
  cache.z = numerics::matmul(*cache.input, cache.weights);
  attend_and_activate(layer, adj, options, cache);
}

// Attention, aggregation and activation from cache.z.
void attend_and_activate(const GatLayerParams& layer, const Adjacency& adj,
                         const ForwardOptions& options, LayerCache& cache) {
  const std::size_t n = adj.node_count();
  const std::size_t out = layer.out_dim;
  const std::size_t heads = layer.heads.size();
  cache.e.resize(heads);
  cache.alpha.resize(heads);
  cache.pre = Matrix(n, heads * out);
  for (std::size_t h = 0; h < heads; ++h) {
    attend(cache.z, layer, h, adj, options.leaky_slope, cache.e[h], cache.alpha[h]);
    const std::size_t col = h * out;
    for (std::size_t i = 0; i < n; ++i) {
      double* yi = cache.pre.row(i).data() + col;
      for (std::size_t k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) {
        const double w = cache.alpha[h][k];
        const double* zj = cache.z.row(adj.neighbors[k]).data() + col;
        for (std::size_t d = 0; d < out; ++d) yi[d] += w * zj[d];
      }
    }
  }
  if (layer.combine == HeadCombine::concat) {
    cache.output = numerics::elu(cache.pre);
  } else {
    cache.output = numerics::row_softmax(cache.pre);
  }
}

// Backward through one layer given d(loss)/d(pre). Accumulates parameter
// gradients into `grad` and returns d(loss)/d(layer input) when asked.
Matrix backward_layer(const LayerCache& cache, const Matrix& d_pre, const GatLayerParams& layer,
                      GatLayerParams& grad, const Adjacency& adj, double slope,
                      bool want_input_grad) {
  const std::size_t n = adj.node_count();
  const std::size_t out = layer.out_dim;
  const std::size_t heads = layer.heads.size();
  Matrix d_z(n, heads * out);
  std::vector<double> d_alpha(adj.neighbors.size());
  std::vector<double> d_src(n), d_dst(n);

  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t col = h * out;
    const auto& alpha = cache.alpha[h];
    const auto& e = cache.e[h];
    const auto& a = layer.heads[h].attention;

    // y_i = sum_j alpha_ij z_j
    for (std::size_t i = 0; i < n; ++i) {
      const double* dy = d_pre.row(i).data() + col;
      for (std::size_t k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) {
        const std::size_t j = adj.neighbors[k];
        const double* zj = cache.z.row(j).data() + col;
        double* dzj = d_z.row(j).data() + col;
        double dot = 0.0;
        for (std::size_t d = 0; d < out; ++d) {
          dot += dy[d] * zj[d];
          dzj[d] += alpha[k] * dy[d];
        }
        d_alpha[k] = dot;
      }
    }

    // softmax over the neighbourhood, then leaky relu, then e_ij = s_i + t_j
    std::fill(d_src.begin(), d_src.end(), 0.0);
    std::fill(d_dst.begin(), d_dst.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double weighted = 0.0;
      for (std::size_t k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) {
        weighted += alpha[k] * d_alpha[k];
      }
      for (std::size_t k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) {
        const double d_logit = alpha[k] * (d_alpha[k] - weighted);
        const double d_e = d_logit * numerics::leaky_relu_derivative(e[k], slope);
        d_src[i] += d_e;
        d_dst[adj.neighbors[k]] += d_e;
      }
    }

    // s_i = a_src . z_i, t_i = a_dst . z_i
    auto& ga = grad.heads[h].attention;
    for (std::size_t i = 0; i < n; ++i) {
      const double* zi = cache.z.row(i).data() + col;
      double* dzi = d_z.row(i).data() + col;
      for (std::size_t d = 0; d < out; ++d) {
        ga[d] += d_src[i] * zi[d];
        ga[out + d] += d_dst[i] * zi[d];
        dzi[d] += d_src[i] * a[d] + d_dst[i] * a[out + d];
      }
    }
  }

  const Matrix d_w = numerics::matmul_at_b(*cache.input, d_z);
  for (std::size_t h = 0; h < heads; ++h) {
    Matrix& gw = grad.heads[h].weight;
    for (std::size_t r = 0; r < layer.in_dim; ++r) {
      const double* src = d_w.row(r).data() + h * out;
      double* dst = gw.row(r).data();
      for (std::size_t d = 0; d < out; ++d) dst[d] += src[d];
    }
  }

  if (!want_input_grad) return {};
  Matrix d_input = numerics::matmul_a_bt(d_z, cache.weights);
  if (!cache.dropout_scale.empty()) {
    auto values = d_input.values();
    for (std::size_t k = 0; k < values.size(); ++k) values[k] *= cache.dropout_scale[k];
  }
  return d_input;
}

}  // namespace

Adjacency build_adjacency(std::size_t node_count, std::span<const graph::Edge> edges,
                          bool self_loops) {
  std::vector<std::size_t> degree(node_count, self_loops ? 1 : 0);
  for (const auto& e : edges) {
    if (e.u >= node_count || e.v >= node_count) {
      throw ReferentialIntegrityError("edge endpoint outside node set");
    }
    if (e.u == e.v) continue;
    ++degree[e.u];
    ++degree[e.v];
  }
  Adjacency adj;
  adj.offsets.assign(node_count + 1, 0);
  for (std::size_t i = 0; i < node_count; ++i) adj.offsets[i + 1] = adj.offsets[i] + degree[i];
  adj.neighbors.resize(adj.offsets.back());
  std::vector<std::size_t> fill(adj.offsets.begin(), adj.offsets.end() - 1);
  if (self_loops) {
    for (std::size_t i = 0; i < node_count; ++i) adj.neighbors[fill[i]++] = i;
  }
  for (const auto& e : edges) {
    if (e.u == e.v) continue;
    adj.neighbors[fill[e.u]++] = e.v;
    adj.neighbors[fill[e.v]++] = e.u;
  }
  for (std::size_t i = 0; i < node_count; ++i) {
    auto first = adj.neighbors.begin() + static_cast<std::ptrdiff_t>(adj.offsets[i]);
    auto last = adj.neighbors.begin() + static_cast<std::ptrdiff_t>(adj.offsets[i + 1]);
    std::sort(first, last);
  }
  return adj;
}

Matrix attention_coefficients(const Matrix& h, const GatLayerParams& layer, std::size_t head,
                              const Adjacency& adjacency, double leaky_slope) {
  check_input(h, layer, adjacency);
  if (head >= layer.heads.size()) throw DimensionError("head index out of range");
  GatLayerParams single = layer;
  single.heads = {layer.heads[head]};
  const Matrix z = numerics::matmul(h, single.heads[0].weight);
  std::vector<double> e, alpha;
  attend(z, single, 0, adjacency, leaky_slope, e, alpha);
  const std::size_t n = adjacency.node_count();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = adjacency.offsets[i]; k < adjacency.offsets[i + 1]; ++k) {
      out(i, adjacency.neighbors[k]) = alpha[k];
    }
  }
  return out;
}

Matrix layer_forward(const Matrix& h, const GatLayerParams& layer, const Adjacency& adjacency,
                     double leaky_slope) {
  ForwardOptions options;
  options.leaky_slope = leaky_slope;
  LayerCache cache;
  forward_layer(h, layer, adjacency, options, cache);
  return std::move(cache.output);
}

Matrix model_forward(const ModelParams& params, const Matrix& features, const Adjacency& adjacency,
                     double leaky_slope) {
  Matrix h = features;
  for (const auto& layer : params.layers) h = layer_forward(h, layer, adjacency, leaky_slope);
  return h;
}

Matrix model_forward(const ModelParams& params, const graph::Graph& g, double leaky_slope) {
  return model_forward(params, g.features, build_adjacency(g), leaky_slope);
}

LossGradient loss_and_gradient(const ModelParams& params, const Matrix& features,
                               const Adjacency& adjacency, std::span<const int> labels,
                               std::span<const std::size_t> train_nodes, double l2,
                               const ForwardOptions& options) {
  if (train_nodes.empty()) throw EmptyMaskError("training mask is empty");
  std::array<LayerCache, kLayerCount> caches;
  const Matrix* input = &features;
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    forward_layer(*input, params.layers[l], adjacency, options, caches[l]);
    input = &caches[l].output;
  }

  LossGradient result;
  result.probabilities = caches.back().output;
  result.data_loss = numerics::cross_entropy(result.probabilities, labels, train_nodes);
  const double norm = squared_norm(params);
  result.loss = result.data_loss + l2 * norm;
  result.gradient = zeros_like(params);

  // softmax + cross-entropy: d/d(pre) = (p - onehot) / |train|
  const std::size_t classes = result.probabilities.cols();
  Matrix d_pre(result.probabilities.rows(), classes);
  const double inv = 1.0 / static_cast<double>(train_nodes.size());
  for (std::size_t node : train_nodes) {
    for (std::size_t c = 0; c < classes; ++c) d_pre(node, c) = result.probabilities(node, c) * inv;
    d_pre(node, static_cast<std::size_t>(labels[node])) -= inv;
  }

  for (std::size_t l = kLayerCount; l-- > 0;) {
    Matrix d_input = backward_layer(caches[l], d_pre, params.layers[l], result.gradient.layers[l],
                                    adjacency, options.leaky_slope, l > 0);
    if (l == 0) break;
    // ELU of the previous hidden layer: d/dy = 1 for y > 0, exp(y) otherwise.
    const Matrix& prev_pre = caches[l - 1].pre;
    auto dv = d_input.values();
    auto pv = prev_pre.values();
    for (std::size_t k = 0; k < dv.size(); ++k) {
      if (pv[k] <= 0.0) dv[k] *= std::exp(pv[k]);
    }
    d_pre = std::move(d_input);
  }

  if (l2 != 0.0) {
    std::vector<std::span<double>> grads;
    for_each_tensor(result.gradient, [&](std::size_t, std::span<double> g) { grads.push_back(g); });
    std::size_t idx = 0;
    for_each_tensor(params, [&](std::size_t, std::span<const double> p) {
      auto g = grads[idx++];
      for (std::size_t k = 0; k < p.size(); ++k) g[k] += 2.0 * l2 * p[k];
    });
  }
  return result;
}

double training_loss(const ModelParams& params, const Matrix& features, const Adjacency& adjacency,
                     std::span<const int> labels, std::span<const std::size_t> train_nodes,
                     double l2, double leaky_slope) {
  const Matrix probs = model_forward(params, features, adjacency, leaky_slope);
  return numerics::cross_entropy(probs, labels, train_nodes) + l2 * squared_norm(params);
}

std::size_t argmax_row(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < row.size(); ++c) {
    if (row[c] > row[best]) best = c;
  }
  return best;
}

double accuracy(const Matrix& probabilities, std::span<const int> labels,
                std::span<const std::size_t> mask) {
  if (mask.empty()) throw EmptyMaskError("accuracy over an empty mask");
  std::size_t correct = 0;
  for (std::size_t node : mask) {
    correct += argmax_row(probabilities.row(node)) == static_cast<std::size_t>(labels[node]) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

double evaluate(const ModelParams& params, const graph::Graph& g, std::span<const std::size_t> mask) {
  if (mask.empty()) throw EmptyMaskError("evaluate over an empty mask");
  return accuracy(model_forward(params, g), g.labels, mask);
}

}  // namespace flgnn::gat
