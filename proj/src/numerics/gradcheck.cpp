#include "flgnn/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "flgnn/error.hpp"
#include "flgnn/random.hpp"

namespace flgnn::numerics {

GradCheckResult finite_difference_check(const ScalarFunction& loss,
                                        std::span<const double> params,
                                        std::span<const double> analytic, double step,
                                        std::size_t sample, std::uint64_t seed) {
  if (!(step >= 1e-6 && step <= 1e-3)) {
    throw std::invalid_argument("finite-difference step must lie in [1e-6, 1e-3]");
  }
  if (params.size() != analytic.size()) {
    throw DimensionError("analytic gradient has " + std::to_string(analytic.size()) +
                         " entries for " + std::to_string(params.size()) + " parameters");
  }
  GradCheckResult result;
  if (params.empty()) return result;

  std::vector<double> point(params.begin(), params.end());
  const double first = loss(point);
  const double second = loss(point);
  if (first != second) {
    throw DeterminismError("loss function returned " + std::to_string(first) + " then " +
                           std::to_string(second) + " for the same parameters");
  }

  std::vector<std::size_t> coords(params.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (sample != 0) {
    const std::size_t want = std::max<std::size_t>(sample, 100);
    if (want < coords.size()) {
      Rng rng(seed);
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(want);
      std::sort(coords.begin(), coords.end());
    }
  }

  for (std::size_t i : coords) {
    const double original = point[i];
    point[i] = original + step;
    const double up = loss(point);
    point[i] = original - step;
    const double down = loss(point);
    point[i] = original;
    const double numeric = (up - down) / (2.0 * step);
    const double deviation =
        std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
    if (!(deviation <= result.max_deviation)) {
      result.max_deviation = deviation;
      result.worst_coordinate = i;
    }
  }
  result.coordinates_checked = coords.size();
  return result;
}

}  // namespace flgnn::numerics
