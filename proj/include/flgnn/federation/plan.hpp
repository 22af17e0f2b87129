#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace flgnn::federation {

enum class Weighting { static_average, dynamic };

// Which layers the server aggregates, how often, and how.
struct AggregationPlan {
  std::array<bool, 3> layers{true, true, true};  // index 0 is layer 1
  std::size_t frequency = 2;                     // aggregate after epoch t when t % q == 0
  Weighting weighting = Weighting::static_average;

  // Accepts "L123", "123", "FLGNN_L13", "FLGNN+_L123" (dynamic) and "FLGNN+"
  // (dynamic, all layers). Throws std::invalid_argument.
  static AggregationPlan parse(const std::string& text, std::size_t frequency = 2);

  bool shares(std::size_t layer_index) const { return layers.at(layer_index); }
  std::vector<std::size_t> shared_layers() const;  // zero-based
  bool fires(std::size_t epoch) const { return epoch % frequency == 0; }
  // "FLGNN_L12" or "FLGNN+_L12".
  std::string name() const;

  // Throws std::invalid_argument for an empty layer set or q == 0.
  void validate() const;

  friend bool operator==(const AggregationPlan&, const AggregationPlan&) = default;
};

// The seven static layer subsets, L1 ... L123.
std::vector<AggregationPlan> all_layer_subsets(std::size_t frequency = 2);

}  // namespace flgnn::federation
