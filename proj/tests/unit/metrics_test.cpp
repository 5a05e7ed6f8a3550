#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tagsiege/baselines.hpp"
#include "tagsiege/errors.hpp"
#include "tagsiege/metrics.hpp"

using namespace tagsiege;
using fixtures::make_graph;

TEST(Homophily, TriangleWithOneOddLabel) {
  const auto g = make_graph({"a", "a", "b"}, {0, 0, 1}, {{0, 1}, {1, 2}, {0, 2}});
  EXPECT_DOUBLE_EQ(label_homophily_edge(g), 1.0 / 3.0);
  FeatureMatrix x = FeatureMatrix::Zero(3, 2);
  x(0, 0) = x(1, 0) = x(2, 1) = 1.0;
  EXPECT_DOUBLE_EQ(homophily_edge(g, x), 1.0 / 3.0);
  // Nodes 0 and 1 see (1 + 0) / 2, node 2 sees 0.
  EXPECT_DOUBLE_EQ(homophily_node(g, x), 1.0 / 3.0);
}

TEST(Homophily, IdenticalFeaturesGiveOne) {
  const auto g = fixtures::random_graph(15, 0.3, 2);
  const FeatureMatrix x = FeatureMatrix::Constant(15, 4, 0.7);
  EXPECT_NEAR(homophily_edge(g, x), 1.0, 1e-15);
  EXPECT_NEAR(homophily_node(g, x), 1.0, 1e-15);
}

TEST(Homophily, NoEdgesIsDegenerate) {
  const auto g = make_graph({"a", "b"}, {0, 1}, {});
  try {
    homophily_edge(g, FeatureMatrix::Ones(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateInput);
  }
  EXPECT_THROW(homophily_node(g, FeatureMatrix::Ones(2, 2)), Error);
}

TEST(Homophily, MatchesBruteForceOnSyntheticGraph) {
  const auto g = fixtures::synthetic(4);
  const auto x = featurize(g.texts(), build_vocabulary(g, 5000));
  EXPECT_NEAR(homophily_edge(g, x), oracle::homophily_edge(g, x), 1e-12);
  EXPECT_NEAR(homophily_node(g, x), oracle::homophily_node(g, x), 1e-12);
}

TEST(Homophily, SingleEdgeFlipMovesEdgeHomophilyByAtMostTwoOverE) {
  const auto g = fixtures::synthetic(5);
  const auto x = featurize(g.texts(), build_vocabulary(g, 5000));
  const double base = homophily_edge(g, x);
  const double bound = 2.0 / static_cast<double>(g.edge_count());
  std::vector<Edge> fewer(g.edges().begin() + 1, g.edges().end());
  std::vector<Edge> more = g.edges();
  for (NodeId v = 1; v < g.node_count(); ++v) {
    if (!g.has_edge(0, v)) {
      more.push_back(Edge::make(0, v));
      break;
    }
  }
  for (const auto& edges : {fewer, more}) {
    const TextAttributedGraph h(g.texts(), g.labels(), g.splits(), edges, g.class_count());
    EXPECT_LE(std::abs(homophily_edge(h, x) - base), bound);
  }
}

TEST(Aggregate, HandValues) {
  const std::vector<double> a = {0.4, 0.8, 0.6};
  const auto r = aggregate(a);
  EXPECT_NEAR(r.average, 0.6, 1e-15);
  ASSERT_TRUE(r.three_max.has_value());
  EXPECT_NEAR(*r.three_max, 0.6, 1e-15);
  EXPECT_NEAR(r.weighted, 1.2 / 1.75, 1e-15);
}

TEST(Aggregate, AllEqualAndShortInputs) {
  const std::vector<double> same = {0.5, 0.5, 0.5, 0.5};
  const auto r = aggregate(same);
  EXPECT_DOUBLE_EQ(r.average, 0.5);
  EXPECT_DOUBLE_EQ(*r.three_max, 0.5);
  EXPECT_DOUBLE_EQ(r.weighted, 0.5);
  const std::vector<double> two = {0.2, 0.9};
  EXPECT_FALSE(aggregate(two).three_max.has_value());
  EXPECT_THROW(aggregate(std::vector<double>{}), Error);
}

TEST(Aggregate, ThreeMaxOfFive) {
  const std::vector<double> v = {0.1, 0.9, 0.3, 0.7, 0.5};
  EXPECT_NEAR(*aggregate(v).three_max, 0.7, 1e-15);
}

TEST(BoundAudit, IdenticalGraphsHaveZeroDeltas) {
  const auto g = fixtures::synthetic(1);
  const auto v = build_vocabulary(g, 5000);
  const auto x = featurize(g.texts(), v);
  const auto a = bound_audit(g, g, x, x, v);
  EXPECT_EQ(a.delta_homophily_edge, 0.0);
  EXPECT_EQ(a.delta_homophily_node, 0.0);
  EXPECT_EQ(a.edge_edits, 0);
  EXPECT_EQ(a.text_nodes_changed, 0);
  EXPECT_FALSE(a.lipschitz_estimate.has_value());
  EXPECT_EQ(a.ratio_edge, 0.0);
}

TEST(BoundAudit, StructureOnlyPlanHasNoTextTerm) {
  const auto g = fixtures::synthetic(1);
  const auto v = build_vocabulary(g, 5000);
  const auto x = featurize(g.texts(), v);
  auto targets = g.nodes_in(Split::Test);
  targets.resize(10);
  const auto out = apply_plan(g, flip_attack(g, targets, Budgets{}), Budgets{});
  const auto a = bound_audit(g, out.graph, x, x, v);
  EXPECT_EQ(a.tau_max, 0.0);
  EXPECT_EQ(a.edge_edits, out.audit.edge_edits);
  EXPECT_NEAR(a.ratio_edge, std::abs(a.delta_homophily_edge) / a.edge_ratio, 1e-12);
}

TEST(Synergy, EmptyPlanHasNoDrops) {
  const auto g = fixtures::synthetic(0);
  const auto v = build_vocabulary(g, 5000);
  const auto x = featurize(g.texts(), v);
  VictimConfig c;
  c.epochs = 50;
  const std::vector<VictimModel> victims = {train_victim(VictimKind::Sgc, g, x, c)};
  const auto targets = g.nodes_in(Split::Test);
  const auto r = synergy_test(g, PerturbationPlan{}, Budgets{}, victims, v, targets);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].drop_struct, 0.0);
  EXPECT_EQ(r.rows[0].drop_text, 0.0);
  EXPECT_EQ(r.rows[0].drop_joint, 0.0);
  EXPECT_TRUE(r.hard_all);
  EXPECT_EQ(r.soft_count, 0u);
}
