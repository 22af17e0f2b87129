#include "flgnn/privacy/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flgnn::privacy {

void DpConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(clip_bound > 0.0) || !std::isfinite(clip_bound)) {
    throw std::invalid_argument("clip bound must be a positive finite value");
  }
}

double DpConfig::noise_scale() const { return sensitivity(clip_bound) / epsilon; }

double sensitivity(double clip_bound) {
  if (!(clip_bound > 0.0)) throw std::invalid_argument("clip bound must be positive");
  return 2.0 * clip_bound;
}

double sample_laplace(Rng& rng, double scale) {
  double u = 0.0;
  do {
    u = uniform01(rng);
  } while (u == 0.0);
  // u in (0, 1); centre it on (-0.5, 0.5)
  const double c = u - 0.5;
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(c));
  return c < 0.0 ? -magnitude : magnitude;
}

double clip(double x, double bound) { return std::clamp(x, -bound, bound); }

void clip_inplace(std::span<double> values, double bound) {
  for (double& v : values) v = clip(v, bound);
}

namespace {

void perturb_layer(gat::GatLayerParams& layer, const DpConfig& dp, double scale, Rng& rng) {
  for (auto& head : layer.heads) {
    for (auto values : {head.weight.values(), std::span<double>(head.attention)}) {
      for (double& v : values) v = clip(v, dp.clip_bound) + sample_laplace(rng, scale);
    }
  }
}

}  // namespace

gat::ModelParams apply_dp(const gat::ModelParams& params, const federation::AggregationPlan& plan,
                          const DpConfig& dp, Rng& rng) {
  dp.validate();
  plan.validate();
  const double scale = dp.noise_scale();
  gat::ModelParams out = params;
  for (std::size_t l : plan.shared_layers()) perturb_layer(out.layers[l], dp, scale, rng);
  return out;
}

federation::ParameterRecord apply_dp(const federation::ParameterRecord& record, const DpConfig& dp,
                                     Rng& rng) {
  dp.validate();
  const double scale = dp.noise_scale();
  federation::ParameterRecord out = record;
  for (auto& layer : out.layers) {
    if (layer) perturb_layer(*layer, dp, scale, rng);
  }
  return out;
}

federation::UploadTransform dp_upload_transform(const DpConfig& dp) {
  dp.validate();
  return [dp](const federation::ParameterRecord& record, std::size_t client, std::size_t epoch) {
    Rng rng = make_rng(dp.seed, "dp-noise", (static_cast<std::uint64_t>(client) << 32) ^ epoch);
    return apply_dp(record, dp, rng);
  };
}

}  // namespace flgnn::privacy
