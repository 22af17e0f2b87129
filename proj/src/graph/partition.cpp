#include "flgnn/graph/partition.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "flgnn/error.hpp"
#include "flgnn/random.hpp"

namespace flgnn::graph {
namespace {

// All nodes in an order where every contiguous window holds labels in
// roughly global proportion: each class's shuffled members are spread evenly
// over [0, 1) with a random phase, then merged by position.
std::vector<std::size_t> stratified_order(const Graph& g, Rng& rng) {
  std::vector<std::vector<std::size_t>> members(g.class_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    members[static_cast<std::size_t>(g.labels[i])].push_back(i);
  }
  struct Slot {
    double position;
    std::size_t node;
  };
  std::vector<Slot> slots;
  slots.reserve(g.node_count());
  for (auto& group : members) {
    std::shuffle(group.begin(), group.end(), rng);
    const double phase = uniform01(rng);
    const double count = static_cast<double>(group.size());
    for (std::size_t k = 0; k < group.size(); ++k) {
      slots.push_back({(static_cast<double>(k) + phase) / count, group[k]});
    }
  }
  std::stable_sort(slots.begin(), slots.end(),
                   [](const Slot& a, const Slot& b) { return a.position < b.position; });
  std::vector<std::size_t> order;
  order.reserve(slots.size());
  for (const Slot& s : slots) order.push_back(s.node);
  return order;
}

std::vector<Graph> materialize(const Graph& g, std::vector<std::vector<std::size_t>> node_sets) {
  std::vector<Graph> clients;
  clients.reserve(node_sets.size());
  for (auto& nodes : node_sets) {
    std::sort(nodes.begin(), nodes.end());
    clients.push_back(induced_subgraph(g, nodes));
  }
  return clients;
}

}  // namespace

std::string to_string(PartitionMode mode) {
  switch (mode) {
    case PartitionMode::overlapping: return "overlapping";
    case PartitionMode::disjoint: return "disjoint";
    case PartitionMode::edge_type: return "edge-type";
  }
  return "unknown";
}

PartitionMode parse_partition_mode(const std::string& name) {
  if (name == "overlapping") return PartitionMode::overlapping;
  if (name == "disjoint") return PartitionMode::disjoint;
  if (name == "edge-type" || name == "edge_type") return PartitionMode::edge_type;
  throw std::invalid_argument("unknown partition mode '" + name + "'");
}

void PartitionSpec::validate() const {
  if (n_clients == 0) throw std::invalid_argument("n_clients must be at least 1");
  if (!(overlap_fraction >= 0.0 && overlap_fraction <= 1.0)) {
    throw std::invalid_argument("overlap_fraction must lie in [0, 1]");
  }
  if (mode == PartitionMode::disjoint && overlap_fraction != 0.0) {
    throw InfeasibleError("disjoint partition requires overlap_fraction = 0, got " +
                          std::to_string(overlap_fraction));
  }
  if (mode == PartitionMode::overlapping && overlap_fraction == 0.0 && n_clients > 1) {
    throw InfeasibleError("overlapping partition requires overlap_fraction > 0");
  }
  split_ratio.normalized();
}

std::vector<Graph> partition_overlapping(const Graph& g, const PartitionSpec& spec) {
  spec.validate();
  if (spec.mode != PartitionMode::overlapping) {
    throw std::invalid_argument("partition_overlapping called with mode " + to_string(spec.mode));
  }
  const std::size_t n_clients = spec.n_clients;
  if (n_clients == 1) return {g};

  const double n = static_cast<double>(g.node_count());
  const double f = spec.overlap_fraction;
  const double pairs = static_cast<double>(n_clients * (n_clients - 1) / 2);
  // Client size s = (N-1) c + (n - P c) / N and core c = f s give
  // c = f n / (N (1 - f (N-1) / 2)).
  const double denom = 1.0 - f * static_cast<double>(n_clients - 1) / 2.0;
  const double core_exact = denom > 0.0 ? f * n / (static_cast<double>(n_clients) * denom) : n + 1;
  const auto core = static_cast<std::size_t>(std::llround(core_exact));
  if (denom <= 0.0 || pairs * static_cast<double>(core) > n) {
    throw InfeasibleError("overlap_fraction " + std::to_string(f) + " with " +
                          std::to_string(n_clients) + " clients needs more than " +
                          std::to_string(g.node_count()) + " nodes");
  }

  Rng rng(spec.seed);
  const auto order = stratified_order(g, rng);
  std::vector<std::vector<std::size_t>> sets(n_clients);
  std::size_t cursor = 0;
  for (std::size_t a = 0; a < n_clients; ++a) {
    for (std::size_t b = a + 1; b < n_clients; ++b) {
      for (std::size_t k = 0; k < core; ++k, ++cursor) {
        sets[a].push_back(order[cursor]);
        sets[b].push_back(order[cursor]);
      }
    }
  }
  for (std::size_t k = 0; cursor < order.size(); ++k, ++cursor) {
    sets[k % n_clients].push_back(order[cursor]);
  }
  return materialize(g, std::move(sets));
}

std::vector<Graph> partition_disjoint(const Graph& g, const PartitionSpec& spec) {
  spec.validate();
  if (spec.mode != PartitionMode::disjoint) {
    throw std::invalid_argument("partition_disjoint called with mode " + to_string(spec.mode));
  }
  if (spec.n_clients > g.node_count()) {
    throw InfeasibleError(std::to_string(spec.n_clients) + " clients for " +
                          std::to_string(g.node_count()) + " nodes");
  }
  Rng rng(spec.seed);
  const auto order = stratified_order(g, rng);
  std::vector<std::vector<std::size_t>> sets(spec.n_clients);
  for (std::size_t k = 0; k < order.size(); ++k) sets[k % spec.n_clients].push_back(order[k]);
  return materialize(g, std::move(sets));
}

std::vector<Graph> partition(const Graph& g, const PartitionSpec& spec) {
  switch (spec.mode) {
    case PartitionMode::overlapping: return partition_overlapping(g, spec);
    case PartitionMode::disjoint: return partition_disjoint(g, spec);
    case PartitionMode::edge_type: break;
  }
  throw std::invalid_argument("edge-type partitions are built from typed graphs");
}

std::vector<Graph> partition_edge_types(const std::vector<Graph>& typed_graphs) {
  if (typed_graphs.empty()) throw std::invalid_argument("no edge-type graphs given");
  const Graph& first = typed_graphs.front();
  for (const Graph& g : typed_graphs) {
    if (g.node_ids != first.node_ids || g.labels != first.labels) {
      throw FormatError("edge-type graphs must share node ids and labels");
    }
  }
  return typed_graphs;
}

std::size_t dropped_edge_count(const Graph& whole, const std::vector<Graph>& clients) {
  std::set<std::pair<std::string, std::string>> kept;
  for (const Graph& c : clients) {
    for (const Edge& e : c.edges) {
      auto a = c.node_ids[e.u], b = c.node_ids[e.v];
      if (b < a) std::swap(a, b);
      kept.emplace(a, b);
    }
  }
  std::size_t dropped = 0;
  for (const Edge& e : whole.edges) {
    auto a = whole.node_ids[e.u], b = whole.node_ids[e.v];
    if (b < a) std::swap(a, b);
    dropped += kept.count({a, b}) == 0 ? 1 : 0;
  }
  return dropped;
}

}  // namespace flgnn::graph
