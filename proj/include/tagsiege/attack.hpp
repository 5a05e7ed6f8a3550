#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tagsiege/backend.hpp"
#include "tagsiege/graph.hpp"
#include "tagsiege/prompt.hpp"
#include "tagsiege/retrieval.hpp"
#include "tagsiege/text.hpp"

namespace tagsiege {

/// Whether the text step is anchored on the same influencer as the inserted
/// edge (the attack proper) or deliberately on a different one (ablation).
enum class AnchorMode { Aligned, Misaligned };

struct AttackConfig {
  std::size_t influencer_count = kDefaultInfluencerCount;
  Budgets budgets;
  std::uint64_t seed = 0;
  AnchorMode anchor = AnchorMode::Aligned;
  PromptTemplates templates;
};

struct TopologyPrompt {
  std::string text;
  std::vector<NodeId> neighbors;
  /// Candidates in the (seeded, shuffled) order they appear in the prompt.
  std::vector<NodeId> candidates;
};

/// Renders the combined three-step topology prompt. Neighbors whose edge is
/// in `locked` and candidates that are the target, current neighbors, or
/// locked are left out. Throws IsolatedNode for degree-0 targets unless
/// `allow_isolated`, and RetrievalExhausted when no candidate remains.
TopologyPrompt build_topology_prompt(const TextAttributedGraph& graph, NodeId target,
                                     const InfluencerSet& influencers,
                                     const PromptTemplate& tmpl, std::uint64_t seed,
                                     bool allow_isolated = false,
                                     const std::set<Edge>* locked = nullptr);

std::string build_text_prompt(const TextAttributedGraph& graph, NodeId target, NodeId influencer,
                              const PromptTemplate& tmpl);

struct Selection {
  NodeId node = 0;
  bool fell_back = false;
};

/// Validates the backend's deletion choice against the presented neighbors,
/// substituting the embedding oracle when it is missing or invalid.
Selection select_deletion(const TopologyDecision& decision, std::span<const NodeId> neighbor_ids,
                          const Eigen::MatrixXd& embeddings, NodeId target);

/// Same for the insertion choice against the presented candidates.
Selection select_insertion(const TopologyDecision& decision, std::span<const NodeId> candidate_ids,
                           const Eigen::MatrixXd& embeddings, NodeId target,
                           const TextAttributedGraph& graph);

struct AttackStats {
  /// Primary (non-retry) backend queries of completed targets.
  std::size_t queries = 0;
  /// Re-prompts after invalid answers.
  std::size_t retries = 0;
  /// Queries spent on targets that were later skipped.
  std::size_t abandoned_queries = 0;
  std::size_t completed = 0;
  std::size_t fallbacks = 0;
  std::size_t noop_anchors = 0;
  std::size_t backend_failures = 0;
};

struct AttackResult {
  PerturbationPlan plan;
  AttackStats stats;
};

/// Runs retrieval-guided topology and text perturbation for every target,
/// two backend queries per completed target. Targets are processed in the
/// given order and an edge touched by an earlier entry is never edited again,
/// so per-entry edit counts add up exactly. Throws Backend when every target
/// was skipped because of backend failures.
AttackResult attack(const TextAttributedGraph& graph, std::span<const NodeId> targets,
                    const Eigen::MatrixXd& embeddings, AttackerBackend& backend,
                    const Vocabulary& vocab, const AttackConfig& config);

}  // namespace tagsiege
