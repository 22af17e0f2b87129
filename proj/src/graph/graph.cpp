#include "flgnn/graph/graph.hpp"

#include <algorithm>
#include <unordered_set>

#include "flgnn/error.hpp"

namespace flgnn::graph {

std::vector<std::size_t> Graph::nodes_with(Role role) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i] == role) out.push_back(i);
  }
  return out;
}

std::unordered_map<std::string, std::size_t> Graph::id_index() const {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(node_ids.size());
  for (std::size_t i = 0; i < node_ids.size(); ++i) index.emplace(node_ids[i], i);
  return index;
}

std::optional<std::size_t> Graph::find(const std::string& node_id) const {
  auto it = std::find(node_ids.begin(), node_ids.end(), node_id);
  if (it == node_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - node_ids.begin());
}

void Graph::validate() const {
  const std::size_t n = node_count();
  if (features.rows() != n) {
    throw FormatError("feature matrix has " + std::to_string(features.rows()) + " rows for " +
                      std::to_string(n) + " nodes");
  }
  if (feature_names.size() != features.cols()) {
    throw FormatError("feature name count does not match feature width");
  }
  if (labels.size() != n) throw FormatError("label count does not match node count");
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= class_count()) {
      throw FormatError("label " + std::to_string(label) + " outside [0, " +
                        std::to_string(class_count()) + ")");
    }
  }
  if (!roles.empty() && roles.size() != n) throw FormatError("role count does not match nodes");
  std::unordered_set<std::string> seen;
  for (const auto& id : node_ids) {
    if (!seen.insert(id).second) throw FormatError("duplicate node id '" + id + "'");
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    if (e.u >= n || e.v >= n) {
      throw ReferentialIntegrityError("edge endpoint outside node set");
    }
    if (e.u >= e.v) throw FormatError("edge not canonical (u < v required)");
    if (i > 0 && !(edges[i - 1] < e)) throw FormatError("edges not sorted/unique");
  }
}

std::vector<Edge> canonicalize_edges(std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [a, b] : pairs) {
    if (a == b) continue;
    edges.push_back(a < b ? Edge{a, b} : Edge{b, a});
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

Graph induced_subgraph(const Graph& g, std::span<const std::size_t> nodes) {
  constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::vector<std::size_t> remap(g.node_count(), kAbsent);
  Graph sub;
  sub.feature_names = g.feature_names;
  sub.class_names = g.class_names;
  sub.features = numerics::Matrix(nodes.size(), g.feature_dim());
  sub.node_ids.reserve(nodes.size());
  sub.labels.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::size_t src = nodes[i];
    if (remap[src] != kAbsent) throw FormatError("node listed twice in subgraph selection");
    remap[src] = i;
    sub.node_ids.push_back(g.node_ids[src]);
    sub.labels.push_back(g.labels[src]);
    std::copy(g.features.row(src).begin(), g.features.row(src).end(),
              sub.features.row(i).begin());
    if (!g.roles.empty()) sub.roles.push_back(g.roles[src]);
  }
  std::vector<std::pair<std::size_t, std::size_t>> kept;
  for (const Edge& e : g.edges) {
    if (remap[e.u] != kAbsent && remap[e.v] != kAbsent) kept.emplace_back(remap[e.u], remap[e.v]);
  }
  sub.edges = canonicalize_edges(kept);
  return sub;
}

double homophily_ratio(const Graph& g) {
  if (g.edges.empty() || g.node_count() < 2) return 0.0;
  std::size_t same = 0;
  for (const Edge& e : g.edges) same += g.labels[e.u] == g.labels[e.v] ? 1 : 0;
  const auto hist = label_histogram(g);
  double same_pairs = 0.0;
  for (std::size_t c : hist) same_pairs += 0.5 * static_cast<double>(c) * static_cast<double>(c - (c > 0 ? 1 : 0));
  const double n = static_cast<double>(g.node_count());
  const double all_pairs = 0.5 * n * (n - 1.0);
  const double edge_fraction = static_cast<double>(same) / static_cast<double>(g.edges.size());
  return edge_fraction / (same_pairs / all_pairs);
}

std::vector<std::size_t> label_histogram(const Graph& g) {
  std::vector<std::size_t> hist(g.class_count(), 0);
  for (int label : g.labels) ++hist[static_cast<std::size_t>(label)];
  return hist;
}

}  // namespace flgnn::graph
