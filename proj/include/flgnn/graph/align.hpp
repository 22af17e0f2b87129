#pragma once

#include <vector>

#include "flgnn/graph/graph.hpp"

namespace flgnn::graph {

// Gives every graph the union of all feature columns, in first-seen order
// across the list, zero-filling columns a graph lacks. A node present in
// several graphs must agree on every column both graphs carry (a zero
// counts as missing); otherwise FeatureConflictError lists the offending
// (node, column) pairs.
// Idempotent.
std::vector<Graph> align_features(const std::vector<Graph>& graphs);

// Re-indexes labels so that every graph shares one class-name table (union
// in first-seen order). Needed when client files are loaded independently.
std::vector<Graph> align_classes(const std::vector<Graph>& graphs);

}  // namespace flgnn::graph
