#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "tagsiege/graph.hpp"

namespace tagsiege {

struct Dissimilarity {
  double value = 1.0;
  /// True when either vector has zero norm; value is then 1.0.
  bool degenerate = false;
};

/// 1 - cos(a, b), clamped to [0, 2].
Dissimilarity cosine_dissimilarity(const Eigen::Ref<const Eigen::VectorXd>& a,
                                   const Eigen::Ref<const Eigen::VectorXd>& b);

/// cos(a, b); 0 when either vector is zero.
double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b);

struct Candidate {
  NodeId node = 0;
  double dissimilarity = 0.0;
  bool operator==(const Candidate&) const = default;
};

struct InfluencerSet {
  NodeId target = 0;
  /// Dissimilarity descending, ties by ascending node id.
  std::vector<Candidate> candidates;
  bool operator==(const InfluencerSet&) const = default;
};

inline constexpr std::size_t kDefaultInfluencerCount = 5;

InfluencerSet retrieve_influencers(const Eigen::MatrixXd& embeddings, NodeId target, std::size_t k);

std::map<NodeId, InfluencerSet> retrieve_all(const Eigen::MatrixXd& embeddings,
                                             std::span<const NodeId> targets, std::size_t k);

/// JSONL {"target": int, "candidates": [[id, dissim], ...]}.
void save_influencers(const std::map<NodeId, InfluencerSet>& sets,
                      const std::filesystem::path& path);
std::map<NodeId, InfluencerSet> load_influencers(const std::filesystem::path& path);

}  // namespace tagsiege
