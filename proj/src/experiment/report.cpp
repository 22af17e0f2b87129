#include "flgnn/experiment/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "flgnn/error.hpp"

namespace flgnn::experiment {

std::string format_number(double value) {
  if (!std::isfinite(value)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

namespace {

// Shortest text that parses back to the same double, so tables rebuilt from
// result_cells.csv match the originals.
std::string format_exact(double value) {
  if (!std::isfinite(value)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string table(const ExperimentResult& r, bool deviation) {
  std::string out = "variant";
  for (const auto& c : r.clients) out += "," + c;
  out += '\n';
  for (const auto& v : r.variants) {
    out += v;
    for (const auto& c : r.clients) {
      const auto x = deviation ? r.stddev(v, c) : r.mean(v, c);
      out += "," + (x ? format_number(*x) : std::string("NA"));
    }
    out += '\n';
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s) {
  if (s == "NA") return std::nan("");
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw FormatError("not a number: '" + s + "'");
  }
}

}  // namespace

std::string result_table_csv(const ExperimentResult& result) { return table(result, false); }
std::string result_table_std_csv(const ExperimentResult& result) { return table(result, true); }

std::string result_cells_csv(const ExperimentResult& result) {
  std::string out = "variant,client,fold,run_id,accuracy,best_val_acc,test_at_best,final_test_acc,best_epoch\n";
  for (const auto& c : result.cells) {
    out += c.variant + ',' + c.client + ',' + std::to_string(c.fold) + ',' + c.run_id + ',' +
           format_exact(c.accuracy) + ',' + format_exact(c.best_val_acc) + ',' +
           format_exact(c.test_at_best) + ',' + format_exact(c.final_test_acc) + ',' +
           std::to_string(c.best_epoch) + '\n';
  }
  return out;
}

std::string failures_csv(const ExperimentResult& result) {
  std::string out = "variant,fold,kind,message\n";
  for (const auto& f : result.failures) {
    std::string msg = f.message;
    for (char& ch : msg) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out += f.variant + ',' + std::to_string(f.fold) + ',' + (f.divergence ? "divergence" : "error") + ',' + msg + '\n';
  }
  return out;
}

std::string result_table_markdown(const ExperimentResult& result) {
  std::string out = "| variant |";
  for (const auto& c : result.clients) out += " " + c + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < result.clients.size(); ++i) out += "---|";
  out += '\n';
  for (const auto& v : result.variants) {
    out += "| " + v + " |";
    for (const auto& c : result.clients) {
      const auto m = result.mean(v, c);
      const auto s = result.stddev(v, c);
      char buf[64];
      if (m && s) {
        std::snprintf(buf, sizeof buf, " %.4f ± %.4f |", *m, *s);
      } else {
        std::snprintf(buf, sizeof buf, " NA |");
      }
      out += buf;
    }
    out += '\n';
  }
  out += "\nselection: " + to_string(result.selection) + ", folds: " + std::to_string(result.folds) + '\n';
  return out;
}

std::string gap_curve_csv(const std::vector<GapPoint>& points) {
  std::string out = "n_clients,full,flgnn,alone,gap_fl,gap_alone\n";
  for (const auto& p : points) {
    out += std::to_string(p.n_clients) + ',' + format_number(p.full) + ',' + format_number(p.flgnn) + ',' +
           format_number(p.alone) + ',' + format_number(p.gap_fl) + ',' + format_number(p.gap_alone) + '\n';
  }
  return out;
}

std::string attack_report_csv(const std::vector<AttackRow>& rows) {
  std::string out = "scenario,mode,epsilon,seed,fold,i_acc,i_adv,model_val_acc,model_test_acc\n";
  for (const auto& r : rows) {
    out += r.scenario + ',' + privacy::to_string(r.mode) + ',' + (r.epsilon ? format_number(*r.epsilon) : "") +
           ',' + std::to_string(r.seed) + ',' + std::to_string(r.fold) + ',' + format_number(r.i_acc) + ',' +
           format_number(r.i_adv) + ',' + format_number(r.model_val_acc) + ',' +
           format_number(r.model_test_acc) + '\n';
  }
  return out;
}

ExperimentResult read_result_cells(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("variant,client,fold", 0) != 0) {
    throw FormatError(path.string() + ": not a result_cells.csv file");
  }
  ExperimentResult r;
  std::set<std::size_t> folds;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 9) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 9 fields");
    RunCell c;
    c.variant = f[0];
    c.client = f[1];
    c.fold = std::stoul(f[2]);
    c.run_id = f[3];
    c.accuracy = parse_number(f[4]);
    c.best_val_acc = parse_number(f[5]);
    c.test_at_best = parse_number(f[6]);
    c.final_test_acc = parse_number(f[7]);
    c.best_epoch = std::stoul(f[8]);
    if (std::find(r.variants.begin(), r.variants.end(), c.variant) == r.variants.end()) r.variants.push_back(c.variant);
    if (std::find(r.clients.begin(), r.clients.end(), c.client) == r.clients.end()) r.clients.push_back(c.client);
    folds.insert(c.fold);
    r.cells.push_back(std::move(c));
  }
  r.folds = folds.size();
  return r;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_experiment(const std::filesystem::path& dir, const ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  write_text(dir / "result_table.csv", result_table_csv(result));
  write_text(dir / "result_table_std.csv", result_table_std_csv(result));
  write_text(dir / "result_cells.csv", result_cells_csv(result));
  write_text(dir / "failures.csv", failures_csv(result));
  write_text(dir / "result_table.md", result_table_markdown(result));
  std::ofstream logs(dir / "rounds.jsonl", std::ios::binary);
  if (!logs) throw Error("cannot write " + (dir / "rounds.jsonl").string());
  for (const auto& log : result.logs) log.write_jsonl(logs);
}

}  // namespace flgnn::experiment
