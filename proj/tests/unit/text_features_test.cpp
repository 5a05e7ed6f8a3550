#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tagsiege/backend.hpp"
#include "tagsiege/errors.hpp"
#include "tagsiege/io.hpp"
#include "tagsiege/text.hpp"

using namespace tagsiege;

TEST(Tokenize, LowercasesAndSplitsOnNonAlphanumerics) {
  EXPECT_EQ(tokenize("Graph-NEURAL  nets, v2!"),
            (std::vector<std::string>{"graph", "neural", "nets", "v2"}));
  EXPECT_TRUE(tokenize(" -- ").empty());
}

TEST(TokenEditDistance, IsMultisetSymmetricDifference) {
  EXPECT_EQ(token_edit_distance("a b c", "a b c"), 0u);
  EXPECT_EQ(token_edit_distance("a b c", "a b d"), 2u);
  EXPECT_EQ(token_edit_distance("a a b", "a b"), 1u);
  EXPECT_EQ(token_edit_distance("A, b", "a B"), 0u);
}

TEST(Vocabulary, TieBreakIsLexicographic) {
  const std::vector<std::string> corpus = {"a b", "a c"};
  const auto v = build_vocabulary(corpus, 2);
  EXPECT_EQ(v.terms(), (std::vector<std::string>{"a", "b"}));
}

TEST(Vocabulary, CapNotBinding) {
  const std::vector<std::string> corpus = {"x"};
  EXPECT_EQ(build_vocabulary(corpus, 10).size(), 1u);
}

TEST(Vocabulary, EmptyCorpusIsAnError) {
  const std::vector<std::string> corpus = {"", "--"};
  try {
    build_vocabulary(corpus, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyCorpus);
  }
}

TEST(Vocabulary, SyntheticCorpusMatchesFrequencyOracle) {
  const auto g = fixtures::synthetic(2);
  const auto v = build_vocabulary(g, 500);
  ASSERT_EQ(v.size(), 500u);
  EXPECT_EQ(v.terms(), oracle::top_terms(g.texts(), 500));
}

TEST(Featurize, MatchesHandComputedTfIdf) {
  const std::vector<std::string> corpus = {"apple banana apple", "banana cherry", "cherry durian apple"};
  const auto v = build_vocabulary(corpus, 100);
  const auto x = featurize(corpus, v);
  ASSERT_EQ(x.rows(), 3);
  ASSERT_EQ(x.cols(), 4);
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (std::size_t t = 0; t < v.size(); ++t) {
      EXPECT_NEAR(x(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(t)),
                  oracle::tfidf(corpus, d, v.term(t)), 1e-9);
    }
  }
  // apple appears twice in doc 0 and in 2 of 3 docs.
  EXPECT_NEAR(x(0, v.index_of("apple")), 2.0 * (std::log(4.0 / 3.0) + 1.0), 1e-12);
}

TEST(Featurize, UnknownTextGivesZeroRowAndIdenticalTextsIdenticalRows) {
  const std::vector<std::string> corpus = {"a b", "b c"};
  const auto v = build_vocabulary(corpus, 10);
  EXPECT_TRUE(featurize_text("zzz qqq", v).isZero());
  EXPECT_EQ(featurize_text("a b", v), featurize_text("b a", v));
}

TEST(TextDrift, ZeroAndOrthogonal) {
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd e2 = Eigen::VectorXd::Zero(3);
  e1(0) = 1.0;
  e2(1) = 1.0;
  EXPECT_EQ(text_drift(e1, e1), 0.0);
  EXPECT_NEAR(text_drift(e1, e2), std::sqrt(2.0), 1e-15);
}

TEST(Lipschitz, SinglePairAndDegenerate) {
  const std::vector<std::string> corpus = {"a b c", "c d e"};
  const auto v = build_vocabulary(corpus, 10);
  const std::vector<std::string> changed = {"a b c", "c d a"};
  // One token swapped: edit distance 2, so the estimate is drift / 2.
  const double drift = text_drift(featurize_text(corpus[1], v), featurize_text(changed[1], v));
  EXPECT_NEAR(estimate_lipschitz(corpus, changed, v), drift / 2.0, 1e-15);
  try {
    estimate_lipschitz(corpus, corpus, v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateInput);
  }
}

TEST(Lipschitz, SyntheticRewritesMatchPairScanOracle) {
  const auto g = fixtures::synthetic(1);
  const auto v = build_vocabulary(g, 5000);
  std::vector<std::string> perturbed = g.texts();
  for (NodeId t = 0; t < 30; ++t) {
    const NodeId infl = (t + 150) % static_cast<NodeId>(g.node_count());
    perturbed[t] = oracle_text_edit(g.text(t), g.text(infl), v, {}, 8).new_text;
  }
  double best = 0.0;
  for (std::size_t i = 0; i < perturbed.size(); ++i) {
    const auto a = oracle::words(g.texts()[i]);
    if (perturbed[i] == g.texts()[i]) continue;
    const Eigen::VectorXd xa = featurize_text(g.texts()[i], v);
    const Eigen::VectorXd xb = featurize_text(perturbed[i], v);
    const double drift = std::sqrt((xa - xb).squaredNorm());
    EXPECT_NEAR(text_drift(xa, xb), drift, 1e-12);
    best = std::max(best, drift / static_cast<double>(token_edit_distance(g.texts()[i], perturbed[i])));
  }
  EXPECT_NEAR(estimate_lipschitz(g.texts(), perturbed, v), best, 1e-12);
}

TEST(Embeddings, RoundTripAndValidation) {
  fixtures::TempDir dir;
  Eigen::MatrixXd m(3, 2);
  m << 0.5, -1.25, 3.0, 0.0, 1e-3, 7.0;
  save_embeddings(dir / "e.jsonl", m);
  EXPECT_EQ(load_embeddings(dir / "e.jsonl", 3), m);
  try {
    load_embeddings(dir / "e.jsonl", 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(e.kind(), ErrorKind::Backend);
  }
  write_file(dir / "bad.jsonl", "{\"id\": 0, \"vec\": [1, 2]}\n{\"id\": 1, \"vec\": [1]}\n");
  EXPECT_THROW(load_embeddings(dir / "bad.jsonl", 2), Error);
}
