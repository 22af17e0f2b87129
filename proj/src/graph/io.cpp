#include "flgnn/graph/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "flgnn/error.hpp"
#include "flgnn/log.hpp"

namespace flgnn::graph {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Non-empty lines of `text`, each trimmed.
std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(start, end - start));
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

void split_into(std::string_view line, char sep, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(sep, start);
    if (end == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return;
    }
    out.push_back(trim(line.substr(start, end - start)));
    start = end + 1;
  }
}

void split_whitespace(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
}

double parse_double(std::string_view field, const fs::path& path, std::size_t line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw FormatError(path.string() + ":" + std::to_string(line) + ": not a number: '" +
                      std::string(field) + "'");
  }
  return value;
}

class LabelIndexer {
 public:
  int index(std::string_view name) {
    auto [it, inserted] = ids_.try_emplace(std::string(name), static_cast<int>(names_.size()));
    if (inserted) names_.emplace_back(name);
    return it->second;
  }
  std::vector<std::string> names() && { return std::move(names_); }

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> names_;
};

std::vector<Edge> resolve_edges(
    const std::vector<std::pair<std::string_view, std::string_view>>& raw,
    const std::unordered_map<std::string, std::size_t>& index, const fs::path& path,
    bool drop_dangling = false) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(raw.size());
  std::size_t dropped = 0;
  for (const auto& [a, b] : raw) {
    auto ia = index.find(std::string(a));
    auto ib = index.find(std::string(b));
    if ((ia == index.end() || ib == index.end()) && drop_dangling) {
      ++dropped;
      continue;
    }
    if (ia == index.end() || ib == index.end()) {
      throw ReferentialIntegrityError(path.string() + ": edge (" + std::string(a) + ", " +
                                      std::string(b) + ") references an unknown node '" +
                                      std::string(ia == index.end() ? a : b) + "'");
    }
    pairs.emplace_back(ia->second, ib->second);
  }
  if (dropped > 0) {
    warn(path.string() + ": skipped " + std::to_string(dropped) +
         " citation(s) to papers missing from the content file");
  }
  return canonicalize_edges(pairs);
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

Graph load_graph(const fs::path& features_path, const fs::path& edges_path,
                 const fs::path& labels_path) {
  Graph g;
  std::vector<std::string_view> fields;

  const std::string feature_text = read_file(features_path);
  const auto feature_lines = lines_of(feature_text);
  if (feature_lines.empty()) throw FormatError(features_path.string() + ": missing header row");
  split_into(feature_lines[0], ',', fields);
  if (fields.empty() || fields[0] != "node_id") {
    throw FormatError(features_path.string() + ": header must start with node_id");
  }
  for (std::size_t c = 1; c < fields.size(); ++c) g.feature_names.emplace_back(fields[c]);
  const std::size_t width = g.feature_names.size();
  std::vector<double> values;
  values.reserve((feature_lines.size() - 1) * width);
  for (std::size_t l = 1; l < feature_lines.size(); ++l) {
    split_into(feature_lines[l], ',', fields);
    if (fields.size() != width + 1) {
      throw FormatError(features_path.string() + ":" + std::to_string(l + 1) + ": expected " +
                        std::to_string(width + 1) + " fields, found " +
                        std::to_string(fields.size()));
    }
    g.node_ids.emplace_back(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      values.push_back(parse_double(fields[c], features_path, l + 1));
    }
  }
  g.features = numerics::Matrix(g.node_ids.size(), width, std::move(values));
  const auto index = g.id_index();
  if (index.size() != g.node_ids.size()) {
    throw FormatError(features_path.string() + ": duplicate node ids");
  }

  const std::string label_text = read_file(labels_path);
  auto label_lines = lines_of(label_text);
  std::size_t first = 0;
  if (!label_lines.empty()) {
    split_into(label_lines[0], ',', fields);
    if (fields.size() == 2 && fields[0] == "node_id" && fields[1] == "label") first = 1;
  }
  LabelIndexer labels;
  g.labels.assign(g.node_count(), -1);
  for (std::size_t l = first; l < label_lines.size(); ++l) {
    split_into(label_lines[l], ',', fields);
    if (fields.size() != 2) {
      throw FormatError(labels_path.string() + ":" + std::to_string(l + 1) +
                        ": expected node_id,label");
    }
    auto it = index.find(std::string(fields[0]));
    if (it == index.end()) {
      throw ReferentialIntegrityError(labels_path.string() + ": label for unknown node '" +
                                      std::string(fields[0]) + "'");
    }
    g.labels[it->second] = labels.index(fields[1]);
  }
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (g.labels[i] < 0) {
      throw FormatError(labels_path.string() + ": node '" + g.node_ids[i] + "' has no label");
    }
  }
  g.class_names = std::move(labels).names();

  const std::string edge_text = read_file(edges_path);
  const auto edge_lines = lines_of(edge_text);
  std::vector<std::pair<std::string_view, std::string_view>> raw;
  for (std::size_t l = 0; l < edge_lines.size(); ++l) {
    split_into(edge_lines[l], ',', fields);
    if (l == 0 && fields.size() == 2 && fields[0] == "src_id" && fields[1] == "dst_id") continue;
    if (fields.size() != 2) {
      throw FormatError(edges_path.string() + ":" + std::to_string(l + 1) +
                        ": expected src_id,dst_id");
    }
    raw.emplace_back(fields[0], fields[1]);
  }
  g.edges = resolve_edges(raw, index, edges_path);
  g.validate();
  return g;
}

Graph load_linqs(const fs::path& content_path, const fs::path& cites_path) {
  Graph g;
  std::vector<std::string_view> fields;
  const std::string content = read_file(content_path);
  const auto lines = lines_of(content);
  std::vector<double> values;
  LabelIndexer labels;
  std::size_t width = 0;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    split_whitespace(lines[l], fields);
    if (fields.size() < 2) throw FormatError(content_path.string() + ": short row");
    if (l == 0) {
      width = fields.size() - 2;
      values.reserve(lines.size() * width);
    } else if (fields.size() - 2 != width) {
      throw FormatError(content_path.string() + ":" + std::to_string(l + 1) +
                        ": non-rectangular feature row");
    }
    g.node_ids.emplace_back(fields.front());
    for (std::size_t c = 1; c + 1 < fields.size(); ++c) {
      values.push_back(parse_double(fields[c], content_path, l + 1));
    }
    g.labels.push_back(labels.index(fields.back()));
  }
  for (std::size_t c = 0; c < width; ++c) g.feature_names.push_back("feat_" + std::to_string(c));
  g.features = numerics::Matrix(g.node_ids.size(), width, std::move(values));
  g.class_names = std::move(labels).names();

  const auto index = g.id_index();
  const std::string cites = read_file(cites_path);
  std::vector<std::pair<std::string_view, std::string_view>> raw;
  for (auto line : lines_of(cites)) {
    split_whitespace(line, fields);
    if (fields.size() != 2) throw FormatError(cites_path.string() + ": expected two ids per row");
    raw.emplace_back(fields[0], fields[1]);
  }
  // The public Citeseer release cites a handful of papers it does not ship.
  g.edges = resolve_edges(raw, index, cites_path, true);
  g.validate();
  return g;
}

Graph load_graph_dir(const fs::path& dir) {
  if (fs::exists(dir / "features.csv")) {
    return load_graph(dir / "features.csv", dir / "edges.csv", dir / "labels.csv");
  }
  fs::path content, cites;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".content") content = entry.path();
      if (entry.path().extension() == ".cites") cites = entry.path();
    }
  }
  if (content.empty() || cites.empty()) {
    throw FormatError(dir.string() + ": neither features.csv nor a *.content/*.cites pair found");
  }
  return load_linqs(content, cites);
}

void write_graph(const fs::path& dir, const Graph& g) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "features.csv", std::ios::binary);
    out << "node_id";
    for (const auto& name : g.feature_names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      out << g.node_ids[i];
      for (double v : g.features.row(i)) out << ',' << format_double(v);
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "edges.csv", std::ios::binary);
    out << "src_id,dst_id\n";
    for (const Edge& e : g.edges) out << g.node_ids[e.u] << ',' << g.node_ids[e.v] << '\n';
  }
  {
    std::ofstream out(dir / "labels.csv", std::ios::binary);
    out << "node_id,label\n";
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      out << g.node_ids[i] << ',' << g.class_names[static_cast<std::size_t>(g.labels[i])] << '\n';
    }
  }
}

void write_client_directory(const fs::path& dir, const Graph& g, const nlohmann::json& extra) {
  write_graph(dir, g);
  nlohmann::json meta = extra;
  meta["nodes"] = g.node_count();
  meta["edges"] = g.edge_count();
  meta["classes"] = g.class_count();
  meta["features"] = g.feature_dim();
  std::ofstream out(dir / "meta.json", std::ios::binary);
  out << meta.dump(2) << '\n';
}

}  // namespace flgnn::graph
