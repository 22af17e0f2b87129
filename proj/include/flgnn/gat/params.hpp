#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "flgnn/numerics/matrix.hpp"

namespace flgnn::gat {

inline constexpr std::size_t kLayerCount = 3;

// One attention head: feature transform W (in_dim x out_dim) and attention
// vector a of length 2 * out_dim, applied as a^T [W h_i || W h_j].
struct AttentionHead {
  numerics::Matrix weight;
  std::vector<double> attention;

  friend bool operator==(const AttentionHead&, const AttentionHead&) = default;
};

enum class HeadCombine {
  concat,  // hidden layer: ELU per head, heads concatenated
  single,  // output layer: one head, row softmax
};

struct GatLayerParams {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  HeadCombine combine = HeadCombine::concat;
  std::vector<AttentionHead> heads;

  std::size_t output_width() const noexcept {
    return combine == HeadCombine::concat ? out_dim * heads.size() : out_dim;
  }
  std::size_t parameter_count() const noexcept {
    return heads.size() * (in_dim * out_dim + 2 * out_dim);
  }

  friend bool operator==(const GatLayerParams&, const GatLayerParams&) = default;
};

struct ModelDims {
  std::size_t n_features = 0;
  std::size_t nhid = 8;
  std::size_t nhead = 8;
  std::size_t n_classes = 0;
};

// The fixed three-layer architecture:
//   n_features -> nhid x nhead (concat) -> nhid x nhead (concat) -> n_classes.
struct ModelParams {
  std::array<GatLayerParams, kLayerCount> layers;

  ModelDims dims() const;
  std::size_t parameter_count() const noexcept;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Glorot-uniform initialisation of every W and a.
ModelParams init_params(const ModelDims& dims, std::uint64_t seed);

// Same shapes, all zeros.
ModelParams zeros_like(const ModelParams& params);

// Throws DimensionError unless the layer chain is consistent (widths match,
// output layer single-headed).
void validate_params(const ModelParams& params);

bool same_shape(const ModelParams& a, const ModelParams& b);
bool same_shape(const GatLayerParams& a, const GatLayerParams& b);

// Visits every parameter tensor in canonical order (layer, head, W then a).
// `fn(layer_index, values)` with a zero-based layer index.
template <typename Params, typename Fn>
void for_each_tensor(Params& params, Fn&& fn) {
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    for (auto& head : params.layers[l].heads) {
      fn(l, head.weight.values());
      fn(l, std::span(head.attention));
    }
  }
}

// Flat copy in for_each_tensor order, and its inverse into an existing shape.
std::vector<double> flatten(const ModelParams& params);
void unflatten(std::span<const double> values, ModelParams& params);

double squared_norm(const ModelParams& params);

}  // namespace flgnn::gat
