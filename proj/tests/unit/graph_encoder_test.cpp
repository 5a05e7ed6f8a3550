#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tagsiege/encoder.hpp"
#include "tagsiege/nn.hpp"
#include "tagsiege/text.hpp"

using namespace tagsiege;
using fixtures::make_graph;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed, double lo = -1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

}  // namespace

TEST(NormalizeAdjacency, IsolatedNodeIsOne) {
  const auto g = make_graph({"a"}, {0}, {});
  const Eigen::MatrixXd a = normalize_adjacency(g);
  ASSERT_EQ(a.rows(), 1);
  EXPECT_EQ(a(0, 0), 1.0);
}

TEST(NormalizeAdjacency, TwoNodePathIsAllHalves) {
  const auto g = make_graph({"a", "b"}, {0, 0}, {{0, 1}});
  const Eigen::MatrixXd a = normalize_adjacency(g);
  EXPECT_TRUE(a.isApprox(Eigen::MatrixXd::Constant(2, 2, 0.5), 1e-15));
}

TEST(NormalizeAdjacency, MatchesDenseOracleOnRandomGraphs) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto g = fixtures::random_graph(20, 0.2, seed);
    const Eigen::MatrixXd got = normalize_adjacency(g);
    EXPECT_LE((got - oracle::normalized_adjacency(g)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(EncoderForward, ZeroFeaturesGiveZeroOutputs) {
  const auto g = fixtures::random_graph(6, 0.5, 9);
  EncoderParams p{random_matrix(4, 3, 1), random_matrix(3, 2, 2)};
  const auto out = forward(p, normalize_adjacency(g), Eigen::MatrixXd::Zero(6, 4));
  EXPECT_TRUE(out.logits.isZero());
  EXPECT_TRUE(out.embeddings.isZero());
}

TEST(EncoderForward, SingleNodeIsHandComputable) {
  const auto g = make_graph({"a"}, {0}, {});
  EncoderParams p{Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)};
  Eigen::MatrixXd x(1, 1);
  x << 3.0;
  const auto out = forward(p, normalize_adjacency(g), x);
  EXPECT_EQ(out.embeddings(0, 0), 3.0);
  EXPECT_EQ(out.logits(0, 0), 3.0);
  x << -3.0;
  EXPECT_EQ(forward(p, normalize_adjacency(g), x).logits(0, 0), 0.0);
}

TEST(EncoderForward, MatchesStraightLineReimplementation) {
  const auto g = fixtures::random_graph(15, 0.25, 21);
  const Eigen::MatrixXd x = random_matrix(15, 8, 3);
  EncoderParams p{random_matrix(8, 5, 4), random_matrix(5, 3, 5)};
  const auto out = forward(p, normalize_adjacency(g), x);
  const auto [logits, hidden] = oracle::gcn_forward(oracle::normalized_adjacency(g), x, p.w1, p.w2);
  EXPECT_LE((out.logits - logits).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((out.embeddings - hidden).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(EncoderForward, IsPermutationEquivariant) {
  const auto g = fixtures::random_graph(12, 0.3, 8);
  const Eigen::MatrixXd x = random_matrix(12, 6, 6);
  EncoderParams p{random_matrix(6, 4, 7), random_matrix(4, 2, 8)};
  std::vector<NodeId> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) edges.push_back(Edge::make(perm[e.u], perm[e.v]));
  std::vector<std::string> texts(12, "t");
  std::vector<ClassId> labels(12, 0);
  const auto pg = make_graph(texts, labels, edges, 2);
  Eigen::MatrixXd px(12, 6);
  for (NodeId i = 0; i < 12; ++i) px.row(perm[i]) = x.row(i);
  const auto a = forward(p, normalize_adjacency(g), x);
  const auto b = forward(p, normalize_adjacency(pg), px);
  for (NodeId i = 0; i < 12; ++i) {
    EXPECT_LE((a.logits.row(i) - b.logits.row(perm[i])).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GradientCheck, LinearSingleNodeIsExact) {
  const auto g = make_graph({"a"}, {0}, {}, 3);
  Eigen::MatrixXd x(1, 2);
  x << 0.7, -0.2;
  const nn::SgcNetwork net(normalize_adjacency(g), x, 2);
  const std::vector<ClassId> labels = {1};
  nn::GradientCheckOptions opts;
  opts.samples_per_matrix = 100;
  const auto r = nn::gradient_check(net, {random_matrix(2, 3, 1)}, labels, opts);
  EXPECT_EQ(r.checked, 6u);
  EXPECT_LE(r.max_relative_error, 1e-7);
}

TEST(GradientCheck, TenNodeRandomInstances) {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto g = fixtures::random_graph(10, 0.3, seed, 3);
    const Eigen::MatrixXd x = random_matrix(10, 6, seed + 1);
    EncoderParams p{random_matrix(6, 5, seed + 2), random_matrix(5, 3, seed + 3)};
    std::vector<ClassId> labels(g.labels().begin(), g.labels().end());
    labels[4] = -1;  // masked node
    nn::GradientCheckOptions opts;
    opts.samples_per_matrix = 1000;
    opts.weight_decay = 5e-4;
    const auto r = gradient_check(p, normalize_adjacency(g), x, labels, opts);
    EXPECT_EQ(r.checked + r.skipped_kinks, 30u + 15u);
    EXPECT_LE(r.max_relative_error, 1e-4) << "seed " << seed;
  }
}

TEST(GradientCheck, KinkCoordinatesAreExcludedNotFailed) {
  // A hidden unit sits exactly on the relu boundary for node 0, so the
  // finite difference straddles the kink for every W1 coordinate feeding it.
  const auto g = make_graph({"a", "b"}, {0, 1}, {});
  Eigen::MatrixXd x(2, 2);
  x << 1.0, 1.0, 1.0, -1.0;
  Eigen::MatrixXd w1(2, 2);
  w1 << 0.5, 0.3, -0.5, 0.4;
  const Eigen::MatrixXd w2 = random_matrix(2, 2, 4);
  nn::GradientCheckOptions opts;
  opts.samples_per_matrix = 100;
  const auto r = gradient_check({w1, w2}, normalize_adjacency(g), x, g.labels(), opts);
  EXPECT_GT(r.skipped_kinks, 0u);
  EXPECT_LE(r.max_relative_error, 1e-4);
}

TEST(Sgc, EqualsLinearGcnWhenActivationsArePositive) {
  const auto g = fixtures::random_graph(25, 0.15, 17, 3);
  const Eigen::MatrixXd x = random_matrix(25, 7, 1, 0.0);
  const Eigen::MatrixXd w1 = random_matrix(7, 4, 2, 0.0);
  const Eigen::MatrixXd w2 = random_matrix(4, 3, 3);
  const auto a = normalize_adjacency(g);
  const nn::GcnNetwork gcn(a, x);
  const nn::SgcNetwork sgc(a, x, 2);
  const Eigen::MatrixXd w = w1 * w2;
  EXPECT_LE((gcn.logits({w1, w2}) - sgc.logits({w})).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(TrainEncoder, SingleClassLossVanishes) {
  std::vector<std::string> texts = {"a b", "b c", "c d", "d a"};
  const auto g = make_graph(texts, {0, 0, 0, 0}, {{0, 1}, {1, 2}, {2, 3}}, 1);
  const auto v = build_vocabulary(g, 10);
  EncoderConfig c;
  c.weight_decay = 0.0;
  nn::TrainingTrace trace;
  train_encoder(g, featurize(g.texts(), v), c, &trace);
  ASSERT_FALSE(trace.losses.empty());
  EXPECT_LE(trace.losses.back(), 1e-3);
}

TEST(TrainEncoder, FitsSyntheticTrainSplitAndIsDeterministic) {
  const auto g = fixtures::synthetic(0);
  const auto v = build_vocabulary(g, 5000);
  const auto x = featurize(g.texts(), v);
  nn::TrainingTrace trace;
  const auto p = train_encoder(g, x, EncoderConfig{}, &trace);
  EXPECT_LE(trace.losses.size(), 200u);
  // Loss decreases overall even though Adam steps are not monotone.
  EXPECT_LT(trace.losses.back(), 0.5 * trace.losses.front());

  const auto pred = nn::argmax_rows(forward(p, normalize_adjacency(g), x).logits);
  const auto train = g.nodes_in(Split::Train);
  std::size_t correct = 0;
  for (NodeId t : train) correct += pred[t] == g.label(t) ? 1 : 0;
  EXPECT_GE(static_cast<double>(correct) / static_cast<double>(train.size()), 0.95);

  EXPECT_TRUE(train_encoder(g, x, EncoderConfig{}) == p);
}

TEST(EncoderCheckpoint, RoundTrips) {
  EncoderParams p{random_matrix(3, 2, 1), random_matrix(2, 4, 2)};
  fixtures::TempDir dir;
  save_encoder(p, dir / "enc.json");
  EXPECT_TRUE(load_encoder(dir / "enc.json") == p);
}

TEST(ArgmaxRows, TiesGoToLowestClass) {
  EXPECT_EQ(nn::argmax_rows(Eigen::MatrixXd::Zero(3, 4)), (std::vector<ClassId>{0, 0, 0}));
}
