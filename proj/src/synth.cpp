#include "tagsiege/synth.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "tagsiege/errors.hpp"
#include "tagsiege/rng.hpp"

namespace tagsiege {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_index(rng, i)]);
  }
}

}  // namespace

void SynthConfig::validate() const {
  if (node_count < 2) fail(ErrorKind::Config, "synthetic graph needs at least 2 nodes");
  if (class_count < 1) fail(ErrorKind::Config, "class count must be >= 1");
  if (static_cast<std::size_t>(class_count) > node_count) {
    fail(ErrorKind::Config, "more classes than nodes");
  }
  if (!is_probability(p_in) || !is_probability(p_out)) {
    fail(ErrorKind::Config, "edge probabilities must lie in [0, 1]");
  }
  if (p_in <= p_out) fail(ErrorKind::Config, "p_in must exceed p_out");
  if (!is_probability(noise_rate)) fail(ErrorKind::Config, "noise rate must lie in [0, 1]");
  if (tokens_per_text == 0) fail(ErrorKind::Config, "tokens per text must be >= 1");
  if (class_vocab_size == 0) fail(ErrorKind::Config, "class vocabulary must be non-empty");
  if (noise_rate > 0.0 && shared_vocab_size == 0) {
    fail(ErrorKind::Config, "noise tokens need a non-empty shared vocabulary");
  }
  for (double f : {train_fraction, val_fraction, test_fraction}) {
    if (!is_probability(f)) fail(ErrorKind::Config, "split fractions must lie in [0, 1]");
  }
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    fail(ErrorKind::Config, "split fractions must sum to 1");
  }
}

std::string class_word(int cls, std::size_t index) {
  return "c" + std::to_string(cls) + "w" + std::to_string(index);
}

std::string shared_word(std::size_t index) { return "sw" + std::to_string(index); }

TextAttributedGraph generate(const SynthConfig& config) {
  config.validate();
  const std::size_t n = config.node_count;
  const auto classes = static_cast<std::size_t>(config.class_count);

  std::vector<ClassId> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<ClassId>(i % classes);
  auto label_rng = substream(config.seed, "synth/labels");
  shuffle(labels, label_rng);

  std::vector<Split> splits(n, Split::Test);
  const auto train = static_cast<std::size_t>(std::llround(config.train_fraction * static_cast<double>(n)));
  const auto val = std::min(
      n - train, static_cast<std::size_t>(std::llround(config.val_fraction * static_cast<double>(n))));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto split_rng = substream(config.seed, "synth/splits");
  shuffle(order, split_rng);
  for (std::size_t i = 0; i < train; ++i) splits[order[i]] = Split::Train;
  for (std::size_t i = train; i < train + val; ++i) splits[order[i]] = Split::Val;

  std::vector<Edge> edges;
  auto edge_rng = substream(config.seed, "synth/edges");
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double p = labels[u] == labels[v] ? config.p_in : config.p_out;
      if (unit_uniform(edge_rng) < p) {
        edges.push_back(Edge::make(static_cast<NodeId>(u), static_cast<NodeId>(v)));
      }
    }
  }

  std::vector<std::string> texts(n);
  auto text_rng = substream(config.seed, "synth/texts");
  for (std::size_t i = 0; i < n; ++i) {
    std::string& text = texts[i];
    for (std::size_t t = 0; t < config.tokens_per_text; ++t) {
      if (t > 0) text += ' ';
      if (unit_uniform(text_rng) < config.noise_rate) {
        text += shared_word(uniform_index(text_rng, config.shared_vocab_size));
      } else {
        text += class_word(labels[i], uniform_index(text_rng, config.class_vocab_size));
      }
    }
  }

  return TextAttributedGraph(std::move(texts), std::move(labels), std::move(splits),
                             std::move(edges), config.class_count);
}

}  // namespace tagsiege
