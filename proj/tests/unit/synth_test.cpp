#include <gtest/gtest.h>

#include <cmath>

#include "tagsiege/errors.hpp"
#include "tagsiege/synth.hpp"
#include "tagsiege/text.hpp"

using namespace tagsiege;

TEST(Synth, SingleClassHasOnlyIntraEdges) {
  SynthConfig c;
  c.class_count = 1;
  c.node_count = 40;
  const auto g = generate(c);
  EXPECT_EQ(g.class_count(), 1);
  for (ClassId l : g.labels()) EXPECT_EQ(l, 0);
}

TEST(Synth, IsSeedDeterministic) {
  SynthConfig c;
  c.seed = 12;
  EXPECT_TRUE(generate(c) == generate(c));
  SynthConfig d = c;
  d.seed = 13;
  EXPECT_FALSE(generate(c) == generate(d));
}

TEST(Synth, ClassesBalancedAndSplitsSized) {
  SynthConfig c;
  c.node_count = 301;
  c.class_count = 4;
  const auto g = generate(c);
  std::vector<std::size_t> sizes(4, 0);
  for (ClassId l : g.labels()) ++sizes[static_cast<std::size_t>(l)];
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  EXPECT_LE(*hi - *lo, 1u);
  EXPECT_EQ(g.nodes_in(Split::Train).size(), 181u);
  EXPECT_EQ(g.nodes_in(Split::Val).size(), 60u);
  EXPECT_EQ(g.nodes_in(Split::Test).size(), 60u);
}

TEST(Synth, EdgeCountsWithinThreeSigmaOfBinomial) {
  SynthConfig c;
  c.node_count = 400;
  c.seed = 3;
  const auto g = generate(c);
  std::vector<double> per_class(4, 0.0);
  for (ClassId l : g.labels()) per_class[static_cast<std::size_t>(l)] += 1.0;
  double intra_pairs = 0.0;
  for (double s : per_class) intra_pairs += s * (s - 1.0) / 2.0;
  const double all_pairs = 400.0 * 399.0 / 2.0;
  const double inter_pairs = all_pairs - intra_pairs;
  double intra = 0.0;
  double inter = 0.0;
  for (const Edge& e : g.edges()) (g.label(e.u) == g.label(e.v) ? intra : inter) += 1.0;
  auto within = [](double k, double n, double p) {
    return std::abs(k - n * p) <= 3.0 * std::sqrt(n * p * (1.0 - p));
  };
  EXPECT_TRUE(within(intra, intra_pairs, c.p_in)) << intra;
  EXPECT_TRUE(within(inter, inter_pairs, c.p_out)) << inter;
}

TEST(Synth, TextsUseClassAndSharedWords) {
  SynthConfig c;
  c.noise_rate = 0.0;
  const auto g = generate(c);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const auto tokens = tokenize(g.text(v));
    EXPECT_EQ(tokens.size(), c.tokens_per_text);
    const std::string prefix = "c" + std::to_string(g.label(v)) + "w";
    for (const auto& t : tokens) EXPECT_EQ(t.rfind(prefix, 0), 0u) << t;
  }
  EXPECT_EQ(class_word(2, 7), "c2w7");
  EXPECT_EQ(shared_word(3), "sw3");
}

TEST(Synth, RejectsInfeasibleConfigs) {
  auto kind = [](SynthConfig c) {
    try {
      c.validate();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Validation;
  };
  SynthConfig c;
  c.p_in = 0.001;
  EXPECT_EQ(kind(c), ErrorKind::Config);
  c = {};
  c.p_out = 1.5;
  EXPECT_EQ(kind(c), ErrorKind::Config);
  c = {};
  c.train_fraction = 0.7;
  EXPECT_EQ(kind(c), ErrorKind::Config);
  c = {};
  c.shared_vocab_size = 0;
  EXPECT_EQ(kind(c), ErrorKind::Config);
  c = {};
  c.class_count = 0;
  EXPECT_THROW(generate(c), Error);
}
