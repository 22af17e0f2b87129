#include "flgnn/graph/align.hpp"

#include <string>
#include <unordered_map>

#include "flgnn/error.hpp"

namespace flgnn::graph {

std::vector<Graph> align_features(const std::vector<Graph>& graphs) {
  std::vector<std::string> columns;
  std::unordered_map<std::string, std::size_t> column_index;
  for (const Graph& g : graphs) {
    for (const auto& name : g.feature_names) {
      if (column_index.try_emplace(name, columns.size()).second) columns.push_back(name);
    }
  }

  // local_of[g][global column] = column in graph g, or npos.
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::vector<std::size_t>> local_of(graphs.size(),
                                                 std::vector<std::size_t>(columns.size(), npos));
  std::vector<std::vector<std::size_t>> global_of(graphs.size());
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    for (std::size_t c = 0; c < graphs[gi].feature_names.size(); ++c) {
      const std::size_t global = column_index.at(graphs[gi].feature_names[c]);
      local_of[gi][global] = c;
      global_of[gi].push_back(global);
    }
  }

  // First (graph, row) seen for each node id; later copies are compared to it.
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> first_owner;
  std::vector<std::string> offenders;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const Graph& g = graphs[gi];
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      auto [it, inserted] = first_owner.try_emplace(g.node_ids[i], gi, i);
      if (inserted) continue;
      const auto [oi, other_row] = it->second;
      const Graph& other = graphs[oi];
      for (std::size_t c = 0; c < g.feature_names.size(); ++c) {
        const std::size_t oc = local_of[oi][global_of[gi][c]];
        if (oc == npos) continue;
        // a zero is indistinguishable from padding, so it never conflicts
        const double mine = g.features(i, c);
        const double theirs = other.features(other_row, oc);
        if (mine != 0.0 && theirs != 0.0 && mine != theirs) {
          offenders.push_back(g.node_ids[i] + ":" + g.feature_names[c]);
        }
      }
    }
  }
  if (!offenders.empty()) {
    std::string msg = "conflicting feature values for " + std::to_string(offenders.size()) +
                      " (node, column) pairs, first: " + offenders.front();
    throw FeatureConflictError(msg, std::move(offenders));
  }

  std::vector<Graph> out;
  out.reserve(graphs.size());
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const Graph& g = graphs[gi];
    Graph aligned = g;
    aligned.feature_names = columns;
    aligned.features = numerics::Matrix(g.node_count(), columns.size());
    for (std::size_t c = 0; c < g.feature_names.size(); ++c) {
      const std::size_t dst = global_of[gi][c];
      for (std::size_t i = 0; i < g.node_count(); ++i) aligned.features(i, dst) = g.features(i, c);
    }
    out.push_back(std::move(aligned));
  }
  return out;
}

std::vector<Graph> align_classes(const std::vector<Graph>& graphs) {
  std::vector<std::string> names;
  std::unordered_map<std::string, int> index;
  for (const Graph& g : graphs) {
    for (const auto& name : g.class_names) {
      if (index.try_emplace(name, static_cast<int>(names.size())).second) names.push_back(name);
    }
  }
  std::vector<Graph> out = graphs;
  for (Graph& g : out) {
    for (int& label : g.labels) label = index.at(g.class_names[static_cast<std::size_t>(label)]);
    g.class_names = names;
  }
  return out;
}

}  // namespace flgnn::graph
