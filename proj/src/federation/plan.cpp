#include "flgnn/federation/plan.hpp"

#include <stdexcept>

namespace flgnn::federation {

AggregationPlan AggregationPlan::parse(const std::string& text, std::size_t frequency) {
  AggregationPlan plan;
  plan.frequency = frequency;
  std::string rest = text;
  auto strip = [&](const std::string& prefix) {
    if (rest.rfind(prefix, 0) == 0) {
      rest = rest.substr(prefix.size());
      return true;
    }
    return false;
  };
  if (strip("FLGNN+")) {
    plan.weighting = Weighting::dynamic;
    if (rest.empty()) return plan;
    if (!strip("_")) throw std::invalid_argument("cannot parse aggregation plan '" + text + "'");
  } else {
    strip("FLGNN_");
  }
  strip("L");
  if (rest.empty()) throw std::invalid_argument("aggregation plan '" + text + "' names no layer");
  plan.layers = {false, false, false};
  for (char c : rest) {
    if (c < '1' || c > '3') {
      throw std::invalid_argument("aggregation plan '" + text + "': layers must be 1, 2 or 3");
    }
    const auto idx = static_cast<std::size_t>(c - '1');
    if (plan.layers[idx]) {
      throw std::invalid_argument("aggregation plan '" + text + "' repeats layer " + c);
    }
    plan.layers[idx] = true;
  }
  return plan;
}

std::vector<std::size_t> AggregationPlan::shared_layers() const {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l]) out.push_back(l);
  }
  return out;
}

std::string AggregationPlan::name() const {
  std::string out = weighting == Weighting::dynamic ? "FLGNN+_L" : "FLGNN_L";
  for (std::size_t l : shared_layers()) out += static_cast<char>('1' + l);
  return out;
}

void AggregationPlan::validate() const {
  if (shared_layers().empty()) throw std::invalid_argument("aggregation plan shares no layer");
  if (frequency == 0) throw std::invalid_argument("aggregation frequency must be at least 1");
}

std::vector<AggregationPlan> all_layer_subsets(std::size_t frequency) {
  std::vector<AggregationPlan> out;
  for (const char* name : {"L1", "L2", "L3", "L12", "L13", "L23", "L123"}) {
    out.push_back(AggregationPlan::parse(name, frequency));
  }
  return out;
}

}  // namespace flgnn::federation
