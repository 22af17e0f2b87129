#include "flgnn/gat/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flgnn/error.hpp"
#include "flgnn/random.hpp"

namespace flgnn::gat {
namespace {

GatLayerParams make_layer(std::size_t in_dim, std::size_t out_dim, std::size_t heads,
                          HeadCombine combine) {
  GatLayerParams layer;
  layer.in_dim = in_dim;
  layer.out_dim = out_dim;
  layer.combine = combine;
  layer.heads.resize(heads);
  for (auto& head : layer.heads) {
    head.weight = numerics::Matrix(in_dim, out_dim);
    head.attention.assign(2 * out_dim, 0.0);
  }
  return layer;
}

}  // namespace

ModelDims ModelParams::dims() const {
  return {layers[0].in_dim, layers[0].out_dim, layers[0].heads.size(), layers[2].out_dim};
}

std::size_t ModelParams::parameter_count() const noexcept {
  std::size_t total = 0;
  for (const auto& layer : layers) total += layer.parameter_count();
  return total;
}

ModelParams init_params(const ModelDims& dims, std::uint64_t seed) {
  if (dims.n_features == 0 || dims.nhid == 0 || dims.nhead == 0 || dims.n_classes == 0) {
    throw DimensionError("model dimensions must be positive");
  }
  const std::size_t hidden = dims.nhid * dims.nhead;
  ModelParams params;
  params.layers[0] = make_layer(dims.n_features, dims.nhid, dims.nhead, HeadCombine::concat);
  params.layers[1] = make_layer(hidden, dims.nhid, dims.nhead, HeadCombine::concat);
  params.layers[2] = make_layer(hidden, dims.n_classes, 1, HeadCombine::single);

  Rng rng(seed);
  for (auto& layer : params.layers) {
    const double w_limit =
        std::sqrt(6.0 / static_cast<double>(layer.in_dim + layer.out_dim));
    const double a_limit = std::sqrt(6.0 / static_cast<double>(2 * layer.out_dim + 1));
    for (auto& head : layer.heads) {
      for (double& w : head.weight.values()) w = w_limit * (2.0 * uniform01(rng) - 1.0);
      for (double& a : head.attention) a = a_limit * (2.0 * uniform01(rng) - 1.0);
    }
  }
  return params;
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams out = params;
  for_each_tensor(out, [](std::size_t, std::span<double> v) { std::fill(v.begin(), v.end(), 0.0); });
  return out;
}

void validate_params(const ModelParams& params) {
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const auto& layer = params.layers[l];
    if (layer.heads.empty()) throw DimensionError("layer " + std::to_string(l + 1) + " has no heads");
    for (const auto& head : layer.heads) {
      if (head.weight.rows() != layer.in_dim || head.weight.cols() != layer.out_dim ||
          head.attention.size() != 2 * layer.out_dim) {
        throw DimensionError("layer " + std::to_string(l + 1) + " head shape mismatch");
      }
    }
    if (l > 0 && params.layers[l - 1].output_width() != layer.in_dim) {
      throw DimensionError("layer " + std::to_string(l + 1) + " input width " +
                           std::to_string(layer.in_dim) + " != previous output width " +
                           std::to_string(params.layers[l - 1].output_width()));
    }
  }
  if (params.layers[2].combine != HeadCombine::single || params.layers[2].heads.size() != 1) {
    throw DimensionError("output layer must have exactly one head");
  }
}

bool same_shape(const GatLayerParams& a, const GatLayerParams& b) {
  return a.in_dim == b.in_dim && a.out_dim == b.out_dim && a.combine == b.combine &&
         a.heads.size() == b.heads.size();
}

bool same_shape(const ModelParams& a, const ModelParams& b) {
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    if (!same_shape(a.layers[l], b.layers[l])) return false;
  }
  return true;
}

std::vector<double> flatten(const ModelParams& params) {
  std::vector<double> out;
  out.reserve(params.parameter_count());
  for_each_tensor(params, [&](std::size_t, std::span<const double> v) {
    out.insert(out.end(), v.begin(), v.end());
  });
  return out;
}

void unflatten(std::span<const double> values, ModelParams& params) {
  if (values.size() != params.parameter_count()) {
    throw DimensionError("flat parameter vector has " + std::to_string(values.size()) +
                         " entries, model needs " + std::to_string(params.parameter_count()));
  }
  std::size_t offset = 0;
  for_each_tensor(params, [&](std::size_t, std::span<double> v) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), v.size(), v.begin());
    offset += v.size();
  });
}

double squared_norm(const ModelParams& params) {
  double total = 0.0;
  for_each_tensor(params, [&](std::size_t, std::span<const double> v) {
    for (double x : v) total += x * x;
  });
  return total;
}

}  // namespace flgnn::gat
