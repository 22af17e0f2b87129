#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "flgnn/error.hpp"
#include "flgnn/federation/aggregate.hpp"
#include "flgnn/gat/model.hpp"
#include "flgnn/privacy/attack.hpp"
#include "flgnn/privacy/laplace.hpp"

namespace pv = flgnn::privacy;
namespace fed = flgnn::federation;
namespace gat = flgnn::gat;
using flgnn::numerics::Matrix;

namespace {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (double x : xs) m.variance += (x - m.mean) * (x - m.mean);
  m.variance /= static_cast<double>(xs.size() - 1);
  return m;
}

std::vector<double> draws(double scale, std::size_t n, std::uint64_t seed) {
  flgnn::Rng rng(seed);
  std::vector<double> out(n);
  for (double& x : out) x = pv::sample_laplace(rng, scale);
  return out;
}

}  // namespace

TEST(Sensitivity, IntervalWidth) {
  EXPECT_EQ(pv::sensitivity(1.0), 2.0);
  EXPECT_EQ(pv::sensitivity(0.5), 1.0);
  pv::DpConfig dp;
  dp.epsilon = 0.5;
  dp.clip_bound = 1.0;
  EXPECT_EQ(dp.noise_scale(), 4.0);
}

TEST(DpConfig, RejectsNonPositive) {
  pv::DpConfig dp;
  dp.epsilon = 0.0;
  EXPECT_THROW(dp.validate(), std::invalid_argument);
  dp.epsilon = 1.0;
  dp.clip_bound = -1.0;
  EXPECT_THROW(dp.validate(), std::invalid_argument);
}

TEST(Laplace, SampleMeanWithinThreeStandardErrors) {
  const double b = 2.0 / 1.5;
  const auto xs = draws(b, 1'000'000, 3);
  const auto m = moments(xs);
  EXPECT_LE(std::abs(m.mean), 3.0 * b / std::sqrt(1e6) * std::sqrt(2.0));
}

TEST(Laplace, HalvingEpsilonDoublesSpread) {
  pv::DpConfig a;
  a.epsilon = 2.0;
  pv::DpConfig b = a;
  b.epsilon = 1.0;
  const auto sa = moments(draws(a.noise_scale(), 1'000'000, 5));
  const auto sb = moments(draws(b.noise_scale(), 1'000'000, 6));
  EXPECT_NEAR(std::sqrt(sb.variance) / std::sqrt(sa.variance), 2.0, 0.1);
}

TEST(Laplace, SymmetricTails) {
  const auto xs = draws(1.0, 200'000, 8);
  std::size_t above = 0;
  for (double x : xs) above += x > 1.0 ? 1 : 0;
  // P(X > b) = exp(-1) / 2
  EXPECT_NEAR(static_cast<double>(above) / 200'000.0, std::exp(-1.0) / 2.0, 0.005);
}

TEST(ApplyDp, HugeEpsilonOnlyClips) {
  auto p = gat::init_params({5, 3, 2, 3}, 1);
  p.layers[0].heads[0].weight(0, 0) = 7.0;
  pv::DpConfig dp;
  dp.epsilon = 1e12;
  dp.clip_bound = 1.0;
  flgnn::Rng rng(2);
  const auto out = pv::apply_dp(p, fed::AggregationPlan::parse("L1"), dp, rng);
  EXPECT_NEAR(out.layers[0].heads[0].weight(0, 0), 1.0, 1e-6);
  const auto a = gat::flatten(p);
  const auto b = gat::flatten(out);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_NEAR(b[k], std::clamp(a[k], -1.0, 1.0), 1e-6);
  }
  EXPECT_EQ(out.layers[1], p.layers[1]);
  EXPECT_EQ(out.layers[2], p.layers[2]);
}

TEST(ApplyDp, ReproducibleWithSeed) {
  const auto p = gat::init_params({5, 3, 2, 3}, 3);
  pv::DpConfig dp;
  dp.seed = 9;
  const auto hook = pv::dp_upload_transform(dp);
  const auto rec = fed::extract_shared(p, fed::AggregationPlan::parse("L123"), "A");
  EXPECT_EQ(hook(rec, 0, 4), hook(rec, 0, 4));
  EXPECT_NE(hook(rec, 0, 4), hook(rec, 0, 6));
  EXPECT_NE(hook(rec, 1, 4), hook(rec, 0, 4));
}

TEST(Clip, IsAProjection) {
  std::vector<double> v{-3.0, -0.5, 0.0, 0.9, 12.0};
  pv::clip_inplace(v, 1.0);
  const auto once = v;
  pv::clip_inplace(v, 1.0);
  EXPECT_EQ(v, once);
  EXPECT_EQ(once, (std::vector<double>{-1.0, -0.5, 0.0, 0.9, 1.0}));
}

TEST(Confidence, OneHotAndUniform) {
  const Matrix one_hot = Matrix::from_rows({{0, 1, 0}});
  const Matrix uniform(1, 4, 0.25);
  const std::vector<std::size_t> node{0};
  EXPECT_EQ(pv::confidences(one_hot, node).front(), 1.0);
  EXPECT_EQ(pv::confidences(uniform, node).front(), 0.25);
}

TEST(Confidence, MatchesForwardPass) {
  const auto g = fixtures::random_graph(12, 4, 3, 0.3, 5);
  const auto p = gat::init_params({4, 3, 2, 3}, 6);
  const auto probs = gat::model_forward(p, g);
  const auto row = probs.row(7);
  EXPECT_EQ(pv::node_confidence(p, g, g.node_ids[7]), *std::max_element(row.begin(), row.end()));
  EXPECT_THROW(pv::node_confidence(p, g, "nope"), flgnn::MissingNodeError);
}

TEST(Attack, SeparableGroups) {
  const std::vector<double> members(10, 0.99), non_members(10, 0.40);
  const auto r = pv::membership_attack(members, non_members);
  EXPECT_EQ(r.i_acc, 1.0);
  EXPECT_EQ(r.i_adv, 1.0);
}

TEST(Attack, IdenticalConfidencesGiveNoAdvantage) {
  const std::vector<double> members(8, 0.7), non_members(8, 0.7);
  const auto r = pv::membership_attack(members, non_members);
  EXPECT_EQ(r.i_acc, 0.5);
  EXPECT_EQ(r.i_adv, 0.0);
  const std::vector<double> few(2, 0.7);
  const auto unbalanced = pv::membership_attack(few, members);
  EXPECT_DOUBLE_EQ(unbalanced.i_acc, 0.8);
}

TEST(Attack, AdvantageFormulaAndThreeQuarters) {
  const std::vector<double> members{0.9, 0.8, 0.3, 0.95};
  const std::vector<double> non_members{0.2, 0.5, 0.85, 0.1};
  const auto r = pv::membership_attack(members, non_members);
  EXPECT_EQ(r.i_adv, 2.0 * (r.i_acc - 0.5));
  EXPECT_DOUBLE_EQ(r.i_acc, 0.75);
  EXPECT_DOUBLE_EQ(r.i_adv, 0.5);
}

TEST(Attack, SweepIsExhaustivelyOptimal) {
  flgnn::Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> m(15), n(11);
    for (double& x : m) x = std::round(flgnn::uniform01(rng) * 20.0) / 20.0;
    for (double& x : n) x = std::round(flgnn::uniform01(rng) * 20.0) / 20.0;
    const auto r = pv::membership_attack(m, n);
    std::vector<double> thresholds(m);
    thresholds.insert(thresholds.end(), n.begin(), n.end());
    thresholds.push_back(std::numeric_limits<double>::infinity());
    double best = 0.0;
    for (double t : thresholds) {
      double correct = 0.0;
      for (double x : m) correct += x >= t ? 1 : 0;
      for (double x : n) correct += x < t ? 1 : 0;
      best = std::max(best, correct / 26.0);
    }
    EXPECT_DOUBLE_EQ(r.i_acc, best);
    EXPECT_EQ(r.i_adv, 2.0 * (r.i_acc - 0.5));
    EXPECT_GE(r.i_adv, -1.0);
    EXPECT_LE(r.i_adv, 1.0);
  }
}

TEST(Attack, EmptyGroupIsIllPosed) {
  const std::vector<double> some{0.5};
  EXPECT_THROW(pv::membership_attack(some, {}), flgnn::IllPosedAttackError);
  EXPECT_THROW(pv::membership_attack({}, some), flgnn::IllPosedAttackError);
}

TEST(Attack, DefaultCandidatesBalanced) {
  const auto g = fixtures::random_graph(40, 3, 2, 0.1, 13);
  const auto c = pv::default_candidates(g, 4);
  EXPECT_EQ(c.members, g.train_nodes());
  EXPECT_EQ(c.non_members.size(), std::min(c.members.size(), g.test_nodes().size()));
  const auto test = g.test_nodes();
  for (auto v : c.non_members) EXPECT_NE(std::find(test.begin(), test.end(), v), test.end());
  EXPECT_EQ(c.non_members, pv::default_candidates(g, 4).non_members);
}

TEST(Attack, WhiteBoxModelSwapsOnlyUploadedLayers) {
  const auto target = gat::init_params({4, 3, 2, 3}, 20);
  const auto attacker = gat::init_params({4, 3, 2, 3}, 21);
  const auto upload = fed::extract_shared(target, fed::AggregationPlan::parse("L12"), "A");
  const auto model = pv::white_box_model(upload, attacker);
  EXPECT_EQ(model.layers[0], target.layers[0]);
  EXPECT_EQ(model.layers[1], target.layers[1]);
  EXPECT_EQ(model.layers[2], attacker.layers[2]);
}

TEST(Attack, ModeNames) {
  EXPECT_EQ(pv::to_string(pv::AttackMode::white_box), "white-box");
  EXPECT_EQ(pv::parse_attack_mode("black-box"), pv::AttackMode::black_box);
  EXPECT_THROW(pv::parse_attack_mode("grey"), std::invalid_argument);
}
