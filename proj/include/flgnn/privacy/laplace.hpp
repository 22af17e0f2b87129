#pragma once

#include <cstdint>
#include <span>

#include "flgnn/federation/aggregate.hpp"
#include "flgnn/federation/plan.hpp"
#include "flgnn/federation/runner.hpp"
#include "flgnn/gat/params.hpp"
#include "flgnn/random.hpp"

namespace flgnn::privacy {

struct DpConfig {
  double epsilon = 1.0;
  double clip_bound = 1.0;  // C: every shared coordinate is clipped to [-C, C]
  std::uint64_t seed = 0;

  // Throws std::invalid_argument unless epsilon > 0 and C > 0.
  void validate() const;
  // Laplace scale b = sensitivity(C) / epsilon.
  double noise_scale() const;
};

// Per-coordinate L1 sensitivity of a clipped coordinate: 2C.
double sensitivity(double clip_bound);

// Laplace(0, scale) by inverse CDF from one uniform draw.
double sample_laplace(Rng& rng, double scale);

double clip(double x, double bound);
void clip_inplace(std::span<double> values, double bound);

// Clips the layers of `plan` to [-C, C] and adds independent Laplace noise
// to every coordinate. Layers outside the plan are returned untouched.
gat::ModelParams apply_dp(const gat::ModelParams& params, const federation::AggregationPlan& plan,
                          const DpConfig& dp, Rng& rng);

// The same on an upload record (every layer it carries).
federation::ParameterRecord apply_dp(const federation::ParameterRecord& record, const DpConfig& dp,
                                     Rng& rng);

// Upload hook that noises every upload; the noise stream for (client, epoch)
// is derived from dp.seed, so runs are reproducible.
federation::UploadTransform dp_upload_transform(const DpConfig& dp);

}  // namespace flgnn::privacy
