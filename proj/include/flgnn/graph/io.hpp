#pragma once

#include <filesystem>

#include "flgnn/graph/graph.hpp"
#include "json.hpp"

namespace flgnn::graph {

// Reads the three-file CSV layout:
//   features: `node_id,<col>,...` (header required; column names kept)
//   edges:    `src_id,dst_id`     (header optional, undirected, duplicates ok)
//   labels:   `node_id,label`     (header optional; labels densified in
//                                  first-seen order)
// Node order follows the features file.
Graph load_graph(const std::filesystem::path& features_path,
                 const std::filesystem::path& edges_path,
                 const std::filesystem::path& labels_path);

// Reads the whitespace-separated LINQS distribution (`cora.content` with
// `id f_0 ... f_{n-1} label` rows, `cora.cites` with `cited citing` rows).
Graph load_linqs(const std::filesystem::path& content_path,
                 const std::filesystem::path& cites_path);

// Loads `dir` as either the CSV triple (features.csv, edges.csv, labels.csv)
// or a LINQS pair (*.content, *.cites).
Graph load_graph_dir(const std::filesystem::path& dir);

// Writes features.csv, edges.csv and labels.csv into `dir` (created if needed).
void write_graph(const std::filesystem::path& dir, const Graph& g);

// write_graph plus meta.json holding node/edge/class counts merged with
// `extra` (seed, partition spec echo, ...).
void write_client_directory(const std::filesystem::path& dir, const Graph& g,
                            const nlohmann::json& extra);

}  // namespace flgnn::graph
