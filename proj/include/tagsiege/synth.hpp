#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "tagsiege/graph.hpp"

namespace tagsiege {

struct SynthConfig {
  std::size_t node_count = 300;
  int class_count = 4;
  double p_in = 0.05;
  double p_out = 0.005;
  std::size_t tokens_per_text = 8;
  std::size_t class_vocab_size = 150;
  std::size_t shared_vocab_size = 60;
  /// Probability that a token is drawn from the shared vocabulary instead of the class vocabulary.
  double noise_rate = 0.3;
  double train_fraction = 0.6;
  double val_fraction = 0.2;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;

  /// Throws Config on infeasible settings.
  void validate() const;
};

/// Stochastic-block-model graph whose node texts mix class-specific and
/// shared tokens. Labels are class balanced (sizes differ by at most one).
TextAttributedGraph generate(const SynthConfig& config);

/// Word used for token `index` of class `cls`; class vocabularies are disjoint.
std::string class_word(int cls, std::size_t index);
std::string shared_word(std::size_t index);

}  // namespace tagsiege
