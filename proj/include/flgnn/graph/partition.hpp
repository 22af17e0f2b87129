#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flgnn/graph/graph.hpp"
#include "flgnn/graph/splits.hpp"

namespace flgnn::graph {

enum class PartitionMode { overlapping, disjoint, edge_type };

std::string to_string(PartitionMode mode);
PartitionMode parse_partition_mode(const std::string& name);

struct PartitionSpec {
  std::size_t n_clients = 2;
  PartitionMode mode = PartitionMode::overlapping;
  // Fraction of a client's nodes it shares with each other client.
  double overlap_fraction = 0.2;
  SplitRatio split_ratio{};
  std::uint64_t seed = 0;

  // Throws InfeasibleError for contradictory settings (e.g. disjoint mode
  // with a non-zero overlap) and std::invalid_argument for out-of-range ones.
  void validate() const;
};

// Clients of (nearly) equal size. Every pair of clients shares a private core
// of overlap_fraction * client_size nodes drawn from a common pool; the
// remaining nodes are dealt out exclusively. Both steps walk a label-stratified
// ordering, so client label histograms track the global one. The union of all
// client node sets is V; client edges are those induced by the node set.
std::vector<Graph> partition_overlapping(const Graph& g, const PartitionSpec& spec);

// Label-stratified partition of V into n_clients disjoint node sets with
// induced edges; edges crossing clients are dropped.
std::vector<Graph> partition_disjoint(const Graph& g, const PartitionSpec& spec);

// Dispatches on spec.mode (overlapping or disjoint).
std::vector<Graph> partition(const Graph& g, const PartitionSpec& spec);

// One client per edge-type graph. All graphs must share node ids and labels.
std::vector<Graph> partition_edge_types(const std::vector<Graph>& typed_graphs);

// Edges of `whole` that no client keeps (both endpoints present in one client).
std::size_t dropped_edge_count(const Graph& whole, const std::vector<Graph>& clients);

}  // namespace flgnn::graph
