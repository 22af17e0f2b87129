#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace flgnn::numerics {

using ScalarFunction = std::function<double(std::span<const double>)>;

struct GradCheckResult {
  double max_deviation = 0.0;
  std::size_t coordinates_checked = 0;
  std::size_t worst_coordinate = 0;
};

// Compares `analytic` against central differences of `loss` around `params`.
// Deviation per coordinate is |analytic - numeric| / max(1, |numeric|).
//
// `sample` limits the check to that many randomly chosen coordinates (never
// fewer than 100, and every coordinate when the parameter vector is shorter);
// 0 checks all of them. `step` must lie in [1e-6, 1e-3].
//
// Throws DeterminismError if `loss` returns different values for the same
// input.
GradCheckResult finite_difference_check(const ScalarFunction& loss,
                                        std::span<const double> params,
                                        std::span<const double> analytic, double step,
                                        std::size_t sample = 0, std::uint64_t seed = 0);

}  // namespace flgnn::numerics
