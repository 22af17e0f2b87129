#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "flgnn/numerics/matrix.hpp"

namespace flgnn::graph {

// Role of a node in the current split. Storing one role per node keeps the
// train/validation/test masks disjoint by construction.
enum class Role : std::uint8_t { unassigned, train, validation, test };

// Undirected edge between local node indices, canonicalised so that u < v.
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Node-attributed, labelled, undirected graph held by one client (or the
// whole dataset). Self-loops are never stored; the model adds them.
struct Graph {
  std::vector<std::string> node_ids;
  std::vector<std::string> feature_names;
  numerics::Matrix features;  // node_count x feature_dim
  std::vector<int> labels;    // dense class index per node
  std::vector<std::string> class_names;
  std::vector<Edge> edges;  // sorted, unique, u < v
  std::vector<Role> roles;  // empty or one per node

  std::size_t node_count() const noexcept { return node_ids.size(); }
  std::size_t feature_dim() const noexcept { return features.cols(); }
  std::size_t class_count() const noexcept { return class_names.size(); }
  std::size_t edge_count() const noexcept { return edges.size(); }

  std::vector<std::size_t> nodes_with(Role role) const;
  std::vector<std::size_t> train_nodes() const { return nodes_with(Role::train); }
  std::vector<std::size_t> validation_nodes() const { return nodes_with(Role::validation); }
  std::vector<std::size_t> test_nodes() const { return nodes_with(Role::test); }

  std::unordered_map<std::string, std::size_t> id_index() const;
  std::optional<std::size_t> find(const std::string& node_id) const;

  // Throws flgnn::Error describing the first violated invariant.
  void validate() const;
};

// Sorts, orients (u < v) and de-duplicates; self pairs are dropped.
std::vector<Edge> canonicalize_edges(std::span<const std::pair<std::size_t, std::size_t>> pairs);

// Subgraph on `nodes` (in the given order) with every edge whose endpoints
// both survive. Roles, features and labels are carried over.
Graph induced_subgraph(const Graph& g, std::span<const std::size_t> nodes);

// Fraction of edges joining same-label endpoints divided by the fraction of
// same-label node pairs; 1 means no homophily beyond chance.
double homophily_ratio(const Graph& g);

std::vector<std::size_t> label_histogram(const Graph& g);

}  // namespace flgnn::graph
