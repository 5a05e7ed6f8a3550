#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tagsiege/graph.hpp"
#include "tagsiege/synth.hpp"

namespace fixtures {

using tagsiege::ClassId;
using tagsiege::Edge;
using tagsiege::NodeId;
using tagsiege::Split;
using tagsiege::TextAttributedGraph;

inline TextAttributedGraph make_graph(std::vector<std::string> texts, std::vector<ClassId> labels,
                                      std::vector<Edge> edges, int classes = 0) {
  if (classes == 0) {
    for (ClassId c : labels) classes = std::max(classes, static_cast<int>(c) + 1);
  }
  std::vector<Split> splits(texts.size(), Split::Train);
  return TextAttributedGraph(std::move(texts), std::move(labels), std::move(splits),
                             std::move(edges), classes);
}

/// Erdos-Renyi graph with one-word texts; labels cycle over `classes`.
inline TextAttributedGraph random_graph(std::size_t n, double p, std::uint64_t seed,
                                        int classes = 2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> texts;
  std::vector<ClassId> labels;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    texts.push_back("word" + std::to_string(i % 7) + " node" + std::to_string(i));
    labels.push_back(static_cast<ClassId>(i % static_cast<std::size_t>(classes)));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (u(rng) < p) edges.push_back(Edge::make(static_cast<NodeId>(i), static_cast<NodeId>(j)));
    }
  }
  return make_graph(std::move(texts), std::move(labels), std::move(edges), classes);
}

inline TextAttributedGraph synthetic(std::uint64_t seed = 0) {
  tagsiege::SynthConfig config;
  config.seed = seed;
  return tagsiege::generate(config);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tagsiege-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
