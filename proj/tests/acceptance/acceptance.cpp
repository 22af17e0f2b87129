// Acceptance checks, one output line per criterion:
//   criterion <n>: PASS|FAIL|REPORT <details>
// REPORT marks a trend check that missed its target but is only reported.
// Exit status is 1 if any criterion FAILs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "flgnn/experiment/config.hpp"
#include "flgnn/experiment/report.hpp"
#include "flgnn/experiment/runner.hpp"
#include "flgnn/federation/aggregate.hpp"
#include "flgnn/federation/dynamic_weights.hpp"
#include "flgnn/federation/runner.hpp"
#include "flgnn/gat/train.hpp"
#include "flgnn/graph/splits.hpp"
#include "flgnn/graph/synthetic.hpp"
#include "flgnn/log.hpp"
#include "flgnn/privacy/laplace.hpp"
#include "flgnn/random.hpp"

namespace ex = flgnn::experiment;
namespace fed = flgnn::federation;
namespace gat = flgnn::gat;
namespace gr = flgnn::graph;
using nlohmann::json;

namespace {

// Thresholds.
constexpr double kGradTolerance = 1e-4;
constexpr double kGradMaxSeconds = 60.0;
constexpr std::size_t kGradMaxNodes = 20;
constexpr double kParityTolerance = 1e-9;
constexpr std::size_t kParityEpochs = 50;
constexpr double kParityMaxSeconds = 120.0;
constexpr double kAlgebraTolerance = 1e-12;
constexpr double kRowSumTolerance = 1e-9;
constexpr std::size_t kGammaSequences = 10'000;
constexpr double kCoraMarginPoints = 0.5;
constexpr double kCoraFullBandPoints = 4.0;
constexpr double kCoraMaxSeconds = 15.0 * 60.0;
constexpr double kAblationSlackPoints = 0.3;
constexpr double kDisjointMarginPoints = 1.0;
constexpr std::size_t kEdgeTypeSeeds = 10;
constexpr std::size_t kEdgeTypeMinWins = 7;
constexpr std::size_t kPrivacySeeds = 5;
constexpr double kPrivacyEpsilon = 0.5;
constexpr double kRatioCeiling = 0.5;
constexpr double kRatioFloor = 0.3;
constexpr std::size_t kLaplaceDraws = 1'000'000;
constexpr double kLaplaceScale = 2.0;
constexpr double kLaplaceMeanBound = 0.01;
constexpr double kLaplaceVarianceRel = 0.05;
constexpr std::size_t kFolds = 10;

enum class Verdict { pass, fail, report };

struct Outcome {
  Verdict verdict;
  std::string details;
};

std::size_t g_jobs = 1;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* pattern, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::string pts(double accuracy) { return fmt("%.2f", 100.0 * accuracy); }

// Real citation data when the environment points at it, else the stand-in.
json citation_dataset(const char* env, const char* preset) {
  if (const char* dir = std::getenv(env); dir != nullptr && *dir != '\0') return {{"path", dir}};
  return {{"synthetic", {{"preset", preset}}}};
}

std::string dataset_label(const char* env, const char* name) {
  const char* dir = std::getenv(env);
  return dir != nullptr && *dir != '\0' ? std::string(name) : std::string(name) + "-like synthetic";
}

ex::ExperimentResult run(const json& doc) {
  ex::RunOptions o;
  o.jobs = g_jobs;
  o.keep_logs = false;
  return ex::run_experiment(ex::parse_config(doc), o);
}

std::string failures_of(const ex::ExperimentResult& r) {
  std::string out;
  for (const auto& f : r.failures) out += " [" + f.variant + " fold " + std::to_string(f.fold) + ": " + f.message + "]";
  return out;
}

double mean_of(const ex::ExperimentResult& r, const std::string& variant, const std::string& client) {
  return r.mean(variant, client).value_or(std::nan(""));
}

gr::Graph small_graph(std::size_t nodes, std::size_t features, std::size_t classes, std::uint64_t seed) {
  gr::SyntheticSpec spec;
  spec.n_nodes = nodes;
  spec.n_classes = classes;
  spec.feature_dim = features;
  spec.intra_class_edge_prob = 0.3;
  spec.inter_class_edge_prob = 0.05;
  spec.seed = seed;
  return gr::make_splits(gr::generate_synthetic(spec).front(), {1.0, 1.0, 1.0}, seed);
}

// --- 1 -------------------------------------------------------------------

Outcome gradient_check() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::size_t coords = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = small_graph(kGradMaxNodes, 6, 3, seed);
    gat::TrainConfig cfg;
    const auto params = gat::init_params(cfg.dims_for(g), seed + 100);
    const auto r = gat::check_model_gradient(params, g, cfg.l2);
    worst = std::max(worst, r.max_deviation);
    coords += r.coordinates_checked;
  }
  const double secs = seconds_since(start);
  const bool ok = worst < kGradTolerance && secs < kGradMaxSeconds;
  return {ok ? Verdict::pass : Verdict::fail,
          "max deviation " + fmt("%.3g", worst) + " over " + std::to_string(coords) +
              " coordinates, 5 seeds, " + std::to_string(kGradMaxNodes) + " nodes, " + fmt("%.1f", secs) + " s"};
}

// --- 2 -------------------------------------------------------------------

Outcome federation_parity() {
  const auto start = std::chrono::steady_clock::now();
  const auto g = small_graph(60, 12, 3, 21);
  gat::TrainConfig cfg;
  cfg.max_epoch = kParityEpochs;
  const auto init = gat::init_params(cfg.dims_for(g), 22);

  std::vector<gat::ModelParams> central;
  gat::LocalTrainer solo(std::make_shared<const gr::Graph>(g), init, cfg);
  for (std::size_t t = 0; t < kParityEpochs; ++t) {
    solo.train_epoch();
    central.push_back(solo.params());
  }

  fed::FederationOptions opt;
  opt.plan = fed::AggregationPlan::parse("L123", 1);
  double worst = 0.0;
  std::size_t epochs_seen = 0;
  opt.observer = [&](std::size_t epoch, const std::vector<const gat::ModelParams*>& ps) {
    epochs_seen = std::max(epochs_seen, epoch);
    const auto want = gat::flatten(central[epoch - 1]);
    for (const auto* p : ps) {
      const auto got = gat::flatten(*p);
      for (std::size_t k = 0; k < got.size(); ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
    }
  };
  fed::run_federation(fed::make_clients({g, g, g}, init), opt, cfg);
  const double secs = seconds_since(start);
  const bool ok = worst <= kParityTolerance && epochs_seen == kParityEpochs && secs < kParityMaxSeconds;
  return {ok ? Verdict::pass : Verdict::fail,
          "3 identical clients, q=1, L123: max elementwise gap " + fmt("%.3g", worst) + " over " +
              std::to_string(epochs_seen) + " epochs, " + fmt("%.1f", secs) + " s"};
}

// --- 3 -------------------------------------------------------------------

Outcome aggregation_algebra() {
  flgnn::Rng rng(31);
  double mean_gap = 0.0;
  double uniform_gap = 0.0;
  for (std::size_t trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 4;
    std::vector<gat::ModelParams> all;
    for (std::size_t u = 0; u < n; ++u) all.push_back(gat::init_params({7, 4, 3, 3}, trial * 10 + u));
    const auto plan = fed::AggregationPlan::parse("L123");
    const auto avg = fed::fedavg_aggregate(all, plan);
    // elementwise mean of the flat vectors
    std::vector<double> oracle(gat::flatten(all[0]).size(), 0.0);
    for (const auto& p : all) {
      const auto f = gat::flatten(p);
      for (std::size_t k = 0; k < f.size(); ++k) oracle[k] += f[k];
    }
    for (double& v : oracle) v /= static_cast<double>(n);
    for (const auto& p : avg) {
      const auto f = gat::flatten(p);
      for (std::size_t k = 0; k < f.size(); ++k) mean_gap = std::max(mean_gap, std::abs(f[k] - oracle[k]));
    }
    const auto plus = fed::flgnn_plus_aggregate(all, fed::DynamicWeights::uniform(n), plan);
    for (std::size_t u = 0; u < n; ++u) {
      const auto a = gat::flatten(plus[u]);
      const auto b = gat::flatten(avg[u]);
      for (std::size_t k = 0; k < a.size(); ++k) uniform_gap = std::max(uniform_gap, std::abs(a[k] - b[k]));
    }
  }

  double row_gap = 0.0;
  bool bounds_ok = true;
  for (std::size_t s = 0; s < kGammaSequences; ++s) {
    const std::size_t n = 2 + rng() % 5;
    const double eta = 0.2 * flgnn::uniform01(rng);
    const double l_up = 1.0 / static_cast<double>(n) + (1.0 - 1.0 / static_cast<double>(n)) * (0.01 + 0.99 * flgnn::uniform01(rng));
    auto dw = fed::DynamicWeights::uniform(n, eta, l_up);
    const std::size_t steps = 1 + rng() % 40;
    for (std::size_t t = 0; t < steps; ++t) {
      dw = fed::flgnn_plus_update(dw, rng() % n, flgnn::uniform01(rng), flgnn::uniform01(rng));
    }
    for (std::size_t u = 0; u < n; ++u) {
      double sum = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        sum += dw.gamma(u, v);
        if (dw.gamma(u, v) < 0.0) bounds_ok = false;
      }
      if (dw.gamma(u, u) > l_up + kRowSumTolerance) bounds_ok = false;
      row_gap = std::max(row_gap, std::abs(sum - 1.0));
    }
  }
  const bool ok = mean_gap <= kAlgebraTolerance && uniform_gap <= kAlgebraTolerance &&
                  row_gap <= kRowSumTolerance && bounds_ok;
  return {ok ? Verdict::pass : Verdict::fail,
          "fedavg vs mean " + fmt("%.3g", mean_gap) + ", uniform gamma vs fedavg " + fmt("%.3g", uniform_gap) +
              ", worst row-sum error " + fmt("%.3g", row_gap) + " over " + std::to_string(kGammaSequences) +
              " update sequences"};
}

// --- 4 -------------------------------------------------------------------

json cora_config(const json& partition, const std::vector<std::string>& variants) {
  return {{"dataset", citation_dataset("FLGNN_CORA_DIR", "cora-like")},
          {"partition", partition},
          {"federation", {{"variants", variants}}},
          {"folds", kFolds},
          {"seed", 1}};
}

Outcome cora_overlapping() {
  const auto start = std::chrono::steady_clock::now();
  const auto r = run(cora_config({{"mode", "overlapping"}, {"n_clients", 2}}, {"FLGNN_L123", "Alone", "Full"}));
  const double secs = seconds_since(start);
  bool ok = r.failures.empty() && secs < kCoraMaxSeconds;
  std::string details = dataset_label("FLGNN_CORA_DIR", "Cora") + ", 10 folds:";
  for (const auto& c : r.clients) {
    const double f = mean_of(r, "FLGNN_L123", c);
    const double a = mean_of(r, "Alone", c);
    const double full = mean_of(r, "Full", c);
    ok = ok && 100.0 * (f - a) >= kCoraMarginPoints && 100.0 * (full - f) <= kCoraFullBandPoints;
    details += " " + c + " FLGNN " + pts(f) + " Alone " + pts(a) + " Full " + pts(full) + ";";
  }
  details += " " + fmt("%.0f", secs) + " s" + failures_of(r);
  return {ok ? Verdict::pass : Verdict::fail, details};
}

// --- 5 -------------------------------------------------------------------

Outcome layer_ablation() {
  std::string details;
  bool holds = true;
  bool failed_runs = false;
  const std::vector<std::pair<const char*, const char*>> sets{{"FLGNN_CORA_DIR", "cora-like"},
                                                              {"FLGNN_CITESEER_DIR", "citeseer-like"}};
  for (const auto& [env, preset] : sets) {
    json doc = cora_config({{"mode", "overlapping"}, {"n_clients", 2}}, {"FLGNN_L1", "FLGNN_L2", "FLGNN_L3"});
    doc["dataset"] = citation_dataset(env, preset);
    const auto r = run(doc);
    failed_runs = failed_runs || !r.failures.empty();
    details += (details.empty() ? "" : " | ") + dataset_label(env, std::string(preset) == "cora-like" ? "Cora" : "Citeseer") + ":";
    double l1 = 0.0, l2 = 0.0, l3 = 0.0;
    for (const auto& c : r.clients) {
      l1 += mean_of(r, "FLGNN_L1", c) / static_cast<double>(r.clients.size());
      l2 += mean_of(r, "FLGNN_L2", c) / static_cast<double>(r.clients.size());
      l3 += mean_of(r, "FLGNN_L3", c) / static_cast<double>(r.clients.size());
    }
    const double slack = kAblationSlackPoints / 100.0;
    holds = holds && l1 + slack >= l2 && l1 + slack >= l3;
    details += " L1 " + pts(l1) + " L2 " + pts(l2) + " L3 " + pts(l3) + failures_of(r);
  }
  if (failed_runs) return {Verdict::fail, details};
  return {holds ? Verdict::pass : Verdict::report, details + (holds ? "" : " (trend not met)")};
}

// --- 6 -------------------------------------------------------------------

Outcome cora_disjoint() {
  const auto r = run(cora_config({{"mode", "disjoint"}, {"n_clients", 2}}, {"FLGNN_L123", "Alone"}));
  bool ok = r.failures.empty();
  std::string details = dataset_label("FLGNN_CORA_DIR", "Cora") + " disjoint, 10 folds:";
  for (const auto& c : r.clients) {
    const double f = mean_of(r, "FLGNN_L123", c);
    const double a = mean_of(r, "Alone", c);
    ok = ok && 100.0 * (f - a) >= kDisjointMarginPoints;
    details += " " + c + " FLGNN " + pts(f) + " Alone " + pts(a) + ";";
  }
  return {ok ? Verdict::pass : Verdict::fail, details + failures_of(r)};
}

// --- 7 -------------------------------------------------------------------

// A sparse, weakly homophilous edge type and a ten times denser, strongly
// homophilous one over the same 500 nodes.
json edge_type_config(std::uint64_t seed, const std::vector<std::string>& variants, double eta) {
  return {{"dataset",
           {{"synthetic",
             {{"n_nodes", 500},
              {"n_classes", 5},
              {"feature_dim", 50},
              {"feature_signal", 0.3},
              {"edge_types", 2},
              {"type_probabilities", {{0.0024, 0.0014}, {0.06, 0.005}}}}}}},
          {"partition", {{"mode", "edge_type"}, {"split_ratio", {1.0, 1.0, 3.0}}}},
          {"federation", {{"variants", variants}, {"eta", eta}}},
          {"folds", 1},
          {"seed", seed}};
}

Outcome edge_type_trend() {
  std::map<std::string, std::size_t> wins;
  std::vector<std::string> clients;
  for (std::uint64_t seed = 1; seed <= kEdgeTypeSeeds; ++seed) {
    ex::RunOptions o;
    o.keep_logs = false;
    const auto r = ex::edge_type_experiment(
        ex::parse_config(edge_type_config(seed, {"FLGNN_L123", "FLGNN+_L123"}, 0.05)), o);
    if (!r.failures.empty()) return {Verdict::fail, "seed " + std::to_string(seed) + failures_of(r)};
    clients = r.clients;
    for (const auto& c : r.clients) {
      if (mean_of(r, "FLGNN+_L123", c) >= mean_of(r, "FLGNN_L123", c)) ++wins[c];
    }
  }

  // eta = 0 freezes gamma at uniform: FLGNN+ must reproduce FLGNN bit for bit
  const auto cfg = ex::parse_config(edge_type_config(1, {"FLGNN_L123"}, 0.0));
  const auto fold = ex::prepare_fold(ex::load_dataset(cfg), cfg, 0);
  auto clients_for = [&] { return fed::make_clients(fold.clients, fold.init); };
  fed::FederationOptions plain;
  plain.plan = fed::AggregationPlan::parse("FLGNN_L123", cfg.federation.frequency);
  plain.eta = 0.0;
  fed::FederationOptions plus = plain;
  plus.plan = fed::AggregationPlan::parse("FLGNN+_L123", cfg.federation.frequency);
  const auto a = fed::run_federation(clients_for(), plain, cfg.train);
  const auto b = fed::run_federation(clients_for(), plus, cfg.train);
  bool identical = a.clients.size() == b.clients.size();
  for (std::size_t u = 0; identical && u < a.clients.size(); ++u) {
    identical = a.clients[u].params == b.clients[u].params &&
                a.outcomes[u].test_at_best == b.outcomes[u].test_at_best &&
                a.outcomes[u].final_test_acc == b.outcomes[u].final_test_acc;
  }

  bool ok = identical;
  std::string details = "FLGNN+ >= FLGNN in";
  for (const auto& c : clients) {
    ok = ok && wins[c] >= kEdgeTypeMinWins;
    details += " " + c + " " + std::to_string(wins[c]) + "/" + std::to_string(kEdgeTypeSeeds);
  }
  details += std::string(" seeds; eta=0 ") + (identical ? "bit-identical" : "DIFFERS");
  return {ok ? Verdict::pass : Verdict::fail, details};
}

// --- 8 -------------------------------------------------------------------

Outcome privacy_trends() {
  std::map<std::string, double> white;
  std::map<std::string, double> black;
  bool identity = true;
  std::size_t rows = 0;
  for (std::uint64_t seed = 1; seed <= kPrivacySeeds; ++seed) {
    json doc = cora_config({{"mode", "overlapping"}, {"n_clients", 2}}, {"FLGNN_L123"});
    doc["folds"] = 1;
    doc["seed"] = seed;
    doc["dp"] = {{"epsilons", {kPrivacyEpsilon}}};
    ex::RunOptions o;
    o.jobs = g_jobs;
    for (const auto& r : ex::attack_sweep(ex::parse_config(doc), o)) {
      identity = identity && r.i_adv == 2.0 * (r.i_acc - 0.5);
      auto& bucket = r.mode == flgnn::privacy::AttackMode::white_box ? white : black;
      bucket[r.scenario] += r.i_adv / static_cast<double>(kPrivacySeeds);
      ++rows;
    }
  }
  const bool a = white["FLGNN+DP"] < white["FLGNN"];
  const double ratio = white["FLGNN+DP"] / white["Alone"];
  const bool b = ratio <= kRatioCeiling;
  std::string details = "white-box I_adv: Alone " + fmt("%.4f", white["Alone"]) + ", FLGNN " +
                        fmt("%.4f", white["FLGNN"]) + ", FLGNN+DP(eps=0.5) " + fmt("%.4f", white["FLGNN+DP"]) +
                        "; black-box FLGNN " + fmt("%.4f", black["FLGNN"]) + ", FLGNN+DP " +
                        fmt("%.4f", black["FLGNN+DP"]) + "; (a) " + (a ? "ok" : "NOT MET") + "; (b) ratio " +
                        fmt("%.3f", ratio) + (ratio < kRatioFloor ? " (below 0.3)" : "") + "; (c) " +
                        (identity ? "exact" : "BROKEN") + " on " + std::to_string(rows) + " rows";
  if (!a || !identity) return {Verdict::fail, details};
  if (!b || ratio < kRatioFloor) return {Verdict::report, details};
  return {Verdict::pass, details};
}

// --- 9 -------------------------------------------------------------------

Outcome laplace_statistics() {
  flgnn::Rng rng(flgnn::derive_seed(9, "acceptance-laplace"));
  double sum = 0.0;
  std::vector<double> xs(kLaplaceDraws);
  for (double& x : xs) {
    x = flgnn::privacy::sample_laplace(rng, kLaplaceScale);
    sum += x;
  }
  const double mean = sum / static_cast<double>(kLaplaceDraws);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double variance = ss / static_cast<double>(kLaplaceDraws - 1);
  const double target = 2.0 * kLaplaceScale * kLaplaceScale;
  const bool ok = std::abs(mean) < kLaplaceMeanBound && std::abs(variance - target) <= kLaplaceVarianceRel * target;
  return {ok ? Verdict::pass : Verdict::fail,
          "1e6 draws at b=2: mean " + fmt("%.5f", mean) + ", variance " + fmt("%.4f", variance) + " (target 8)"};
}

// --- 10 ------------------------------------------------------------------

Outcome determinism() {
  const json doc = {{"dataset",
                     {{"synthetic",
                       {{"n_nodes", 150}, {"n_classes", 3}, {"feature_dim", 20}, {"intra_class_edge_prob", 0.06},
                        {"inter_class_edge_prob", 0.006}}}}},
                    {"partition", {{"mode", "overlapping"}, {"n_clients", 3}}},
                    {"train", {{"max_epoch", 30}}},
                    {"federation", {{"variants", {"FLGNN_L123", "FLGNN+_L12", "Alone", "Full"}}}},
                    {"folds", 3},
                    {"seed", 10}};
  auto render = [&](std::size_t jobs) {
    ex::RunOptions o;
    o.jobs = jobs;
    const auto r = ex::run_experiment(ex::parse_config(doc), o);
    return ex::result_table_csv(r) + ex::result_table_std_csv(r) + ex::result_cells_csv(r) +
           ex::result_table_markdown(r);
  };
  const auto first = render(1);
  const bool ok = first == render(1) && first == render(2);
  return {ok ? Verdict::pass : Verdict::fail,
          std::string("result tables ") + (ok ? "byte-identical" : "DIFFER") + " across 3 runs (1 and 2 workers)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  app.add_option("-c,--criterion", only, "run only these criteria (1-10)")->check(CLI::Range(1, 10));
  g_jobs = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("-j,--jobs", g_jobs, "worker threads for fold-parallel runs")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  flgnn::set_warning_sink([](const std::string&) {});
  const std::vector<std::function<Outcome()>> checks{
      gradient_check, federation_parity, aggregation_algebra, cora_overlapping, layer_ablation,
      cora_disjoint,  edge_type_trend,   privacy_trends,      laplace_statistics, determinism};
  const std::set<int> wanted(only.begin(), only.end());
  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!wanted.empty() && wanted.count(n) == 0) continue;
    Outcome o;
    try {
      o = checks[i]();
    } catch (const std::exception& e) {
      o = {Verdict::fail, std::string("error: ") + e.what()};
    }
    const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::fail ? "FAIL" : "REPORT";
    std::printf("criterion %d: %s %s\n", n, tag, o.details.c_str());
    std::fflush(stdout);
    if (o.verdict == Verdict::fail) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
