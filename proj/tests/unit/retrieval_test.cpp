#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tagsiege/encoder.hpp"
#include "tagsiege/errors.hpp"
#include "tagsiege/retrieval.hpp"
#include "tagsiege/text.hpp"

using namespace tagsiege;

namespace {

Eigen::MatrixXd one_hots(std::initializer_list<int> axes, int dim) {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(axes.size()), dim);
  Eigen::Index i = 0;
  for (int a : axes) z(i++, a) = 1.0;
  return z;
}

Eigen::MatrixXd gaussian(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

}  // namespace

TEST(CosineDissimilarity, IdentityOrthogonalAntipodal) {
  Eigen::VectorXd a(3);
  a << 1.0, 2.0, -0.5;
  EXPECT_NEAR(cosine_dissimilarity(a, a).value, 0.0, 1e-15);
  EXPECT_NEAR(cosine_dissimilarity(a, -a).value, 2.0, 1e-15);
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(3, 0);
  Eigen::VectorXd e2 = Eigen::VectorXd::Unit(3, 1);
  EXPECT_EQ(cosine_dissimilarity(e1, e2).value, 1.0);
  const auto zero = cosine_dissimilarity(e1, Eigen::VectorXd::Zero(3));
  EXPECT_TRUE(zero.degenerate);
  EXPECT_EQ(zero.value, 1.0);
}

TEST(RetrieveInfluencers, OrthogonalOneHots) {
  const auto set = retrieve_influencers(one_hots({0, 0, 1}, 2), 0, 1);
  ASSERT_EQ(set.candidates.size(), 1u);
  EXPECT_EQ(set.candidates[0].node, 2u);
  EXPECT_EQ(set.candidates[0].dissimilarity, 1.0);
}

TEST(RetrieveInfluencers, CapReturnsEveryOtherNodeSorted) {
  const auto z = gaussian(6, 3, 4);
  const auto set = retrieve_influencers(z, 2, 50);
  const auto expect = oracle::full_dissimilarity_sort(z, 2);
  ASSERT_EQ(set.candidates.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(set.candidates[i].node, expect[i].first);
}

TEST(RetrieveInfluencers, MatchesExhaustiveSortOn50Nodes) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const auto z = gaussian(50, 8, seed);
    for (NodeId t : {0u, 17u, 49u}) {
      const auto set = retrieve_influencers(z, t, 5);
      const auto expect = oracle::full_dissimilarity_sort(z, t);
      ASSERT_EQ(set.candidates.size(), 5u);
      for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(set.candidates[i].node, expect[i].first);
        EXPECT_NEAR(set.candidates[i].dissimilarity, expect[i].second, 1e-12);
      }
    }
  }
}

TEST(RetrieveInfluencers, ErrorsOnBadInput) {
  const auto z = gaussian(4, 2, 1);
  EXPECT_THROW(retrieve_influencers(z, 9, 2), Error);
  EXPECT_THROW(retrieve_influencers(z, 0, 0), Error);
  EXPECT_THROW(retrieve_influencers(gaussian(1, 2, 1), 0, 1), Error);
}

TEST(RetrieveAll, EmptySingletonAndSyntheticBatch) {
  const auto z = gaussian(10, 3, 5);
  EXPECT_TRUE(retrieve_all(z, {}, 5).empty());
  const std::vector<NodeId> one = {4};
  const auto single = retrieve_all(z, one, 3);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single.at(4), retrieve_influencers(z, 4, 3));

  const auto g = fixtures::synthetic(0);
  const auto x = featurize(g.texts(), build_vocabulary(g, 5000));
  EncoderConfig c;
  c.epochs = 20;
  const auto emb = forward(train_encoder(g, x, c), normalize_adjacency(g), x).embeddings;
  const auto targets = g.nodes_in(Split::Test);
  const std::vector<NodeId> first30(targets.begin(), targets.begin() + 30);
  const auto sets = retrieve_all(emb, first30, 5);
  ASSERT_EQ(sets.size(), 30u);
  for (NodeId t : first30) {
    const auto expect = oracle::full_dissimilarity_sort(emb, t);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(sets.at(t).candidates[i].node, expect[i].first);
  }
}

TEST(InfluencerFile, RoundTrips) {
  const auto z = gaussian(12, 3, 8);
  const std::vector<NodeId> targets = {0, 5, 11};
  const auto sets = retrieve_all(z, targets, 4);
  fixtures::TempDir dir;
  save_influencers(sets, dir / "infl.jsonl");
  EXPECT_EQ(load_influencers(dir / "infl.jsonl"), sets);
}
