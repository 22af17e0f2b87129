#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <memory>
#include <numeric>

#include "fixtures.hpp"
#include "flgnn/error.hpp"
#include "flgnn/gat/checkpoint.hpp"
#include "flgnn/gat/model.hpp"
#include "flgnn/gat/params.hpp"
#include "flgnn/gat/train.hpp"

namespace gat = flgnn::gat;
namespace gr = flgnn::graph;
using flgnn::numerics::Matrix;

namespace {

// Straight-line forward pass: dense neighbour sets, explicit loops, no
// sharing with the library's kernels.
Matrix oracle_forward(const gat::ModelParams& p, const gr::Graph& g, double slope = 0.2) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) adj[i][i] = true;
  for (const auto& e : g.edges) adj[e.u][e.v] = adj[e.v][e.u] = true;

  std::vector<std::vector<double>> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i].assign(g.features.row(i).begin(), g.features.row(i).end());

  for (std::size_t l = 0; l < 3; ++l) {
    const auto& layer = p.layers[l];
    std::vector<std::vector<double>> next(n);
    for (const auto& head : layer.heads) {
      std::vector<std::vector<double>> z(n, std::vector<double>(layer.out_dim, 0.0));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < layer.out_dim; ++d)
          for (std::size_t k = 0; k < layer.in_dim; ++k) z[i][d] += h[i][k] * head.weight(k, d);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> logits;
        std::vector<std::size_t> nbrs;
        for (std::size_t j = 0; j < n; ++j) {
          if (!adj[i][j]) continue;
          double e = 0.0;
          for (std::size_t d = 0; d < layer.out_dim; ++d) {
            e += head.attention[d] * z[i][d] + head.attention[layer.out_dim + d] * z[j][d];
          }
          logits.push_back(e > 0 ? e : slope * e);
          nbrs.push_back(j);
        }
        double mx = -1e300, total = 0.0;
        for (double v : logits) mx = std::max(mx, v);
        for (double& v : logits) total += (v = std::exp(v - mx));
        std::vector<double> out(layer.out_dim, 0.0);
        for (std::size_t k = 0; k < nbrs.size(); ++k)
          for (std::size_t d = 0; d < layer.out_dim; ++d) out[d] += logits[k] / total * z[nbrs[k]][d];
        if (layer.combine == gat::HeadCombine::concat) {
          for (double& v : out) v = v > 0 ? v : std::exp(v) - 1.0;
        } else {
          double m2 = -1e300, t2 = 0.0;
          for (double v : out) m2 = std::max(m2, v);
          for (double& v : out) t2 += (v = std::exp(v - m2));
          for (double& v : out) v /= t2;
        }
        next[i].insert(next[i].end(), out.begin(), out.end());
      }
    }
    h = std::move(next);
  }
  Matrix out(n, h[0].size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < h[i].size(); ++c) out(i, c) = h[i][c];
  return out;
}

gat::ModelDims small_dims(const gr::Graph& g) { return {g.feature_dim(), 4, 3, g.class_count()}; }

gr::Graph path_graph() {
  gr::Graph g;
  g.node_ids = {"a", "b", "c", "d"};
  g.feature_names = {"x", "y"};
  g.features = Matrix::from_rows({{1.0, 0.5}, {-0.3, 0.8}, {0.2, -1.0}, {0.9, 0.1}});
  g.class_names = {"p", "q"};
  g.labels = {0, 1, 0, 1};
  g.edges = {{0, 1}, {1, 2}, {2, 3}};
  g.roles = {gr::Role::train, gr::Role::train, gr::Role::validation, gr::Role::test};
  return g;
}

}  // namespace

TEST(Params, ArchitectureShapes) {
  const gat::ModelDims dims{1433, 8, 8, 7};
  const auto p = gat::init_params(dims, 1);
  EXPECT_NO_THROW(gat::validate_params(p));
  EXPECT_EQ(p.layers[0].heads.size(), 8u);
  EXPECT_EQ(p.layers[0].output_width(), 64u);
  EXPECT_EQ(p.layers[1].in_dim, 64u);
  EXPECT_EQ(p.layers[2].heads.size(), 1u);
  EXPECT_EQ(p.layers[2].out_dim, 7u);
  EXPECT_EQ(p.layers[0].parameter_count(), 8u * (1433u * 8u + 16u));
  EXPECT_EQ(p.dims().n_features, 1433u);
}

TEST(Params, FlattenRoundTripAndSeedDeterminism) {
  const gat::ModelDims dims{5, 4, 2, 3};
  const auto a = gat::init_params(dims, 9);
  EXPECT_EQ(a, gat::init_params(dims, 9));
  EXPECT_NE(a, gat::init_params(dims, 10));
  auto b = gat::zeros_like(a);
  gat::unflatten(gat::flatten(a), b);
  EXPECT_EQ(a, b);
  EXPECT_EQ(gat::flatten(a).size(), a.parameter_count());
}

TEST(Params, ValidateRejectsBrokenChains) {
  auto p = gat::init_params({5, 4, 2, 3}, 1);
  p.layers[1].in_dim = 7;
  EXPECT_THROW(gat::validate_params(p), flgnn::DimensionError);
  auto q = gat::init_params({5, 4, 2, 3}, 1);
  q.layers[2].heads.push_back(q.layers[2].heads[0]);
  EXPECT_THROW(gat::validate_params(q), flgnn::DimensionError);
}

TEST(Attention, ZeroAttentionVectorIsUniform) {
  const auto g = path_graph();
  auto p = gat::init_params(small_dims(g), 3);
  for (auto& head : p.layers[0].heads) std::fill(head.attention.begin(), head.attention.end(), 0.0);
  const auto adj = gat::build_adjacency(g);
  const Matrix alpha = gat::attention_coefficients(g.features, p.layers[0], 1, adj);
  EXPECT_DOUBLE_EQ(alpha(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(alpha(0, 1), 0.5);
  for (std::size_t j : {0, 1, 2}) EXPECT_NEAR(alpha(1, j), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(alpha(0, 3), 0.0);
}

TEST(Attention, SelfLoopOnlyNodeAttendsToItself) {
  auto g = path_graph();
  g.edges = {{0, 1}};
  const auto p = gat::init_params(small_dims(g), 4);
  const Matrix alpha = gat::attention_coefficients(g.features, p.layers[0], 0, gat::build_adjacency(g));
  EXPECT_EQ(alpha(3, 3), 1.0);
  EXPECT_EQ(alpha(2, 2), 1.0);
}

TEST(Attention, PathGraphMatchesDirectFormula) {
  const auto g = path_graph();
  const auto p = gat::init_params(small_dims(g), 5);
  const auto& layer = p.layers[0];
  const std::size_t head = 2;
  const Matrix alpha = gat::attention_coefficients(g.features, layer, head, gat::build_adjacency(g));
  const auto& W = layer.heads[head].weight;
  const auto& a = layer.heads[head].attention;
  auto z = [&](std::size_t i, std::size_t d) { return g.features(i, 0) * W(0, d) + g.features(i, 1) * W(1, d); };
  const std::vector<std::vector<std::size_t>> nbrs{{0, 1}, {0, 1, 2}, {1, 2, 3}, {2, 3}};
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<double> ex;
    for (std::size_t j : nbrs[i]) {
      double e = 0.0;
      for (std::size_t d = 0; d < layer.out_dim; ++d) e += a[d] * z(i, d) + a[layer.out_dim + d] * z(j, d);
      ex.push_back(std::exp(e > 0 ? e : 0.2 * e));
    }
    const double total = std::accumulate(ex.begin(), ex.end(), 0.0);
    double row_sum = 0.0;
    for (std::size_t k = 0; k < nbrs[i].size(); ++k) {
      EXPECT_NEAR(alpha(i, nbrs[i][k]), ex[k] / total, 1e-14);
      row_sum += alpha(i, nbrs[i][k]);
    }
    EXPECT_NEAR(row_sum, 1.0, 1e-12);
  }
}

TEST(Attention, EmptyNeighbourhoodIsDegenerate) {
  const auto g = path_graph();
  const auto p = gat::init_params(small_dims(g), 5);
  const auto adj = gat::build_adjacency(g.node_count(), g.edges, false);
  auto isolated = g;
  isolated.edges = {{0, 1}};
  const auto adj2 = gat::build_adjacency(isolated.node_count(), isolated.edges, false);
  EXPECT_NO_THROW(gat::attention_coefficients(g.features, p.layers[0], 0, adj));
  EXPECT_THROW(gat::attention_coefficients(g.features, p.layers[0], 0, adj2), flgnn::DegenerateNeighborhoodError);
}

TEST(Attention, AdjacencyRejectsDanglingEndpoints) {
  const std::vector<gr::Edge> edges{{0, 5}};
  EXPECT_THROW(gat::build_adjacency(3, edges), flgnn::ReferentialIntegrityError);
}

TEST(Layer, SingleNodeLinearRegimeGivesWh) {
  gat::GatLayerParams layer;
  layer.in_dim = 2;
  layer.out_dim = 2;
  layer.combine = gat::HeadCombine::concat;
  layer.heads = {{Matrix::from_rows({{1.0, 0.0}, {0.0, 2.0}}), {0.3, -0.1, 0.2, 0.4}}};
  const Matrix h = Matrix::from_rows({{0.5, 0.25}});
  const auto adj = gat::build_adjacency(1, {});
  const Matrix out = gat::layer_forward(h, layer, adj);
  EXPECT_DOUBLE_EQ(out(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(out(0, 1), 0.5);
}

TEST(Forward, MatchesStraightLineOracle) {
  const auto g = fixtures::random_graph(10, 5, 3, 0.3, 21);
  const auto p = gat::init_params(small_dims(g), 22);
  EXPECT_LE(fixtures::max_abs_diff(gat::model_forward(p, g), oracle_forward(p, g)), 1e-10);
}

TEST(Forward, RowsAreDistributionsAndDeterministic) {
  const auto g = fixtures::random_graph(18, 6, 4, 0.25, 31);
  const auto p = gat::init_params(small_dims(g), 32);
  const Matrix out = gat::model_forward(p, g);
  ASSERT_EQ(out.cols(), g.class_count());
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double s = 0.0;
    for (double v : out.row(i)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  EXPECT_EQ(out, gat::model_forward(p, g));
}

TEST(Forward, PermutationEquivariant) {
  const auto g = fixtures::random_graph(15, 4, 3, 0.3, 41);
  const auto p = gat::init_params(small_dims(g), 42);
  std::vector<std::size_t> perm(g.node_count());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  flgnn::Rng rng(43);
  std::shuffle(perm.begin(), perm.end(), rng);
  // node i of g becomes node perm[i] of h
  gr::Graph h = g;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    h.node_ids[perm[i]] = g.node_ids[i];
    h.labels[perm[i]] = g.labels[i];
    for (std::size_t c = 0; c < g.feature_dim(); ++c) h.features(perm[i], c) = g.features(i, c);
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& e : g.edges) pairs.emplace_back(perm[e.u], perm[e.v]);
  h.edges = gr::canonicalize_edges(pairs);
  const Matrix a = gat::model_forward(p, g);
  const Matrix b = gat::model_forward(p, h);
  for (std::size_t i = 0; i < g.node_count(); ++i)
    for (std::size_t c = 0; c < a.cols(); ++c) EXPECT_NEAR(a(i, c), b(perm[i], c), 1e-12);
}

TEST(Gradient, TenNodeGraphPassesFiniteDifferences) {
  const auto g = fixtures::random_graph(10, 4, 3, 0.35, 51);
  const auto p = gat::init_params(small_dims(g), 52);
  const auto r = gat::check_model_gradient(p, g, 5e-4);
  EXPECT_LT(r.max_deviation, 1e-4);
  EXPECT_EQ(r.coordinates_checked, p.parameter_count());
}

TEST(Gradient, DropoutGradientMatchesFixedMaskLoss) {
  // With a fixed dropout draw the loss is a deterministic function of the
  // parameters; replaying the same rng seed reproduces the mask.
  const auto g = fixtures::random_graph(9, 4, 2, 0.4, 61);
  const auto p = gat::init_params(small_dims(g), 62);
  const auto adj = gat::build_adjacency(g);
  const auto train = g.train_nodes();
  auto loss_at = [&](const gat::ModelParams& q) {
    flgnn::Rng rng(7);
    gat::ForwardOptions o;
    o.dropout = 0.3;
    o.rng = &rng;
    return gat::loss_and_gradient(q, g.features, adj, g.labels, train, 0.0, o);
  };
  const auto lg = loss_at(p);
  const auto flat = gat::flatten(p);
  const auto analytic = gat::flatten(lg.gradient);
  auto scratch = p;
  const auto r = flgnn::numerics::finite_difference_check(
      [&](std::span<const double> x) {
        gat::unflatten(x, scratch);
        return loss_at(scratch).loss;
      },
      flat, analytic, 1e-5);
  EXPECT_LT(r.max_deviation, 1e-4);
}

TEST(Accuracy, HandCounts) {
  const Matrix probs = Matrix::from_rows({{0.9, 0.1}, {0.2, 0.8}, {0.6, 0.4}, {0.3, 0.7}});
  const std::vector<int> labels{0, 1, 1, 1};
  const std::vector<std::size_t> all{0, 1, 2, 3};
  EXPECT_DOUBLE_EQ(gat::accuracy(probs, labels, all), 0.75);
  const std::vector<std::size_t> first_two{0, 1};
  EXPECT_DOUBLE_EQ(gat::accuracy(probs, labels, first_two), 1.0);
  EXPECT_THROW(gat::accuracy(probs, labels, {}), flgnn::EmptyMaskError);
}

TEST(Accuracy, TiesGoToLowestClass) {
  const Matrix probs(3, 4, 0.25);
  const std::vector<int> labels{0, 0, 0};
  const std::vector<std::size_t> all{0, 1, 2};
  EXPECT_DOUBLE_EQ(gat::accuracy(probs, labels, all), 1.0);
  const std::vector<double> row{0.1, 0.4, 0.4};
  EXPECT_EQ(gat::argmax_row(row), 1u);
}

TEST(Accuracy, TenNodeFixture) {
  Matrix probs(10, 3);
  const std::vector<int> labels{0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
  const std::vector<int> predicted{0, 1, 1, 0, 2, 2, 0, 0, 2, 1};
  for (std::size_t i = 0; i < 10; ++i) probs(i, static_cast<std::size_t>(predicted[i])) = 1.0;
  std::vector<std::size_t> all(10);
  std::iota(all.begin(), all.end(), std::size_t{0});
  EXPECT_DOUBLE_EQ(gat::accuracy(probs, labels, all), 0.6);
}

TEST(Training, ZeroLearningRateLeavesParams) {
  const auto g = std::make_shared<gr::Graph>(fixtures::random_graph(12, 4, 3, 0.3, 71));
  gat::TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.nhid = 4;
  cfg.nhead = 2;
  const auto init = gat::init_params(cfg.dims_for(*g), 72);
  gat::LocalTrainer trainer(g, init, cfg);
  for (int t = 0; t < 5; ++t) trainer.train_epoch();
  EXPECT_EQ(trainer.params(), init);
}

TEST(Training, LossDecreasesOnSmallGraphs) {
  int decreasing = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = std::make_shared<gr::Graph>(fixtures::random_graph(20, 5, 3, 0.2, 100 + seed));
    gat::TrainConfig cfg;
    const auto init = gat::init_params(cfg.dims_for(*g), 200 + seed);
    gat::LocalTrainer trainer(g, init, cfg);
    const double first = trainer.train_epoch().loss;
    double last = first;
    for (int t = 1; t < 10; ++t) last = trainer.train_epoch().loss;
    decreasing += last < first ? 1 : 0;
  }
  EXPECT_GE(decreasing, 9);
}

TEST(Training, WeightDecayAloneShrinksNorm) {
  const gat::ModelDims dims{6, 4, 2, 3};
  auto p = gat::init_params(dims, 81);
  const double l2 = 0.0005;
  gat::AdamOptimizer adam(p, 0.005);
  double prev = gat::squared_norm(p);
  for (int t = 0; t < 20; ++t) {
    auto grad = gat::zeros_like(p);
    const auto theta = gat::flatten(p);
    auto g = gat::flatten(grad);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = 2.0 * l2 * theta[k];
    gat::unflatten(g, grad);
    adam.step(p, grad);
    const double now = gat::squared_norm(p);
    EXPECT_LT(now, prev) << "step " << t;
    prev = now;
  }
}

TEST(Training, BitReproducible) {
  const auto g = std::make_shared<gr::Graph>(fixtures::random_graph(16, 4, 3, 0.3, 91));
  gat::TrainConfig cfg;
  cfg.nhid = 4;
  cfg.nhead = 2;
  const auto init = gat::init_params(cfg.dims_for(*g), 92);
  gat::LocalTrainer a(g, init, cfg), b(g, init, cfg);
  for (int t = 0; t < 8; ++t) {
    const auto ra = a.train_epoch();
    const auto rb = b.train_epoch();
    EXPECT_EQ(ra.loss, rb.loss);
  }
  EXPECT_EQ(a.params(), b.params());
}

TEST(Training, DivergenceCarriesEpoch) {
  const auto g = std::make_shared<gr::Graph>(fixtures::random_graph(12, 4, 3, 0.3, 95));
  gat::TrainConfig cfg;
  cfg.nhid = 4;
  cfg.nhead = 2;
  auto init = gat::init_params(cfg.dims_for(*g), 96);
  gat::LocalTrainer trainer(g, init, cfg);
  trainer.train_epoch();
  trainer.params().layers[0].heads[0].weight(0, 0) = std::nan("");
  try {
    trainer.train_epoch();
    FAIL() << "expected DivergenceError";
  } catch (const flgnn::DivergenceError& e) {
    EXPECT_EQ(e.epoch(), 2u);
  }
}

TEST(Training, EmptyTrainMaskIsRejected) {
  auto raw = fixtures::random_graph(8, 3, 2, 0.3, 97);
  for (auto& r : raw.roles) {
    if (r == gr::Role::train) r = gr::Role::test;
  }
  const auto g = std::make_shared<gr::Graph>(raw);
  gat::TrainConfig cfg;
  gat::LocalTrainer trainer(g, gat::init_params(cfg.dims_for(*g), 1), cfg);
  EXPECT_THROW(trainer.train_epoch(), flgnn::EmptyMaskError);
}

TEST(Training, ConfigDefaultsAndValidation) {
  gat::TrainConfig cfg;
  EXPECT_EQ(cfg.lr, 0.005);
  EXPECT_EQ(cfg.l2, 0.0005);
  EXPECT_EQ(cfg.nhid, 8u);
  EXPECT_EQ(cfg.nhead, 8u);
  cfg.dropout = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto p = gat::init_params({7, 4, 3, 5}, 101);
  const auto path = std::filesystem::temp_directory_path() / "flgnn_ckpt.json";
  gat::save_checkpoint(path, p);
  EXPECT_EQ(gat::load_checkpoint(path), p);
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsForeignDocuments) {
  EXPECT_THROW(gat::params_from_json(nlohmann::json{{"format", "other"}}), flgnn::FormatError);
}
