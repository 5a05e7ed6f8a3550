#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tagsiege {

using NodeId = std::uint32_t;
using ClassId = std::int32_t;

/// Unordered node pair stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  static Edge make(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }
  auto operator<=>(const Edge&) const = default;
};

enum class Split { Train, Val, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

/// Undirected text-attributed graph. Immutable once constructed; the
/// constructor canonicalizes the edge list and validates every invariant.
class TextAttributedGraph {
 public:
  TextAttributedGraph(std::vector<std::string> texts, std::vector<ClassId> labels,
                      std::vector<Split> splits, std::vector<Edge> edges, int class_count);

  std::size_t node_count() const noexcept { return texts_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  int class_count() const noexcept { return class_count_; }

  /// Sorted, deduplicated, u < v.
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::span<const NodeId> neighbors(NodeId v) const { return adjacency_.at(v); }
  std::size_t degree(NodeId v) const { return adjacency_.at(v).size(); }
  bool has_edge(NodeId a, NodeId b) const;

  const std::string& text(NodeId v) const { return texts_.at(v); }
  ClassId label(NodeId v) const { return labels_.at(v); }
  Split split(NodeId v) const { return splits_.at(v); }

  const std::vector<std::string>& texts() const noexcept { return texts_; }
  const std::vector<ClassId>& labels() const noexcept { return labels_; }
  const std::vector<Split>& splits() const noexcept { return splits_; }

  std::vector<NodeId> nodes_in(Split split) const;

  bool operator==(const TextAttributedGraph& other) const;

 private:
  std::vector<std::string> texts_;
  std::vector<ClassId> labels_;
  std::vector<Split> splits_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  int class_count_;
};

inline constexpr std::int64_t kUnlimited = std::numeric_limits<std::int64_t>::max();

struct Budgets {
  std::int64_t per_node_edge_budget = 2;
  std::int64_t global_edge_budget = kUnlimited;
  std::int64_t text_token_budget = 8;
  std::int64_t global_text_budget = kUnlimited;

  /// Throws Validation on negative budgets.
  void validate() const;
};

struct PlanEntry {
  NodeId target = 0;
  std::optional<NodeId> delete_neighbor;
  std::optional<NodeId> add_influencer;
  std::optional<std::string> keyword;
  std::optional<std::string> new_text;
  std::string rationale;
  ClassId intended_label = 0;
  /// Set when any decision fell back to the oracle after an invalid backend answer.
  bool fallback = false;

  std::int64_t edge_edit_count() const {
    return (delete_neighbor ? 1 : 0) + (add_influencer ? 1 : 0);
  }
  bool operator==(const PlanEntry&) const = default;
};

struct SkippedTarget {
  NodeId target = 0;
  std::string reason;
  bool operator==(const SkippedTarget&) const = default;
};

struct PerturbationPlan {
  std::map<NodeId, PlanEntry> entries;
  std::vector<SkippedTarget> skipped;

  bool empty() const noexcept { return entries.empty(); }
  /// Copy with text edits removed (structure-only projection).
  PerturbationPlan structure_only() const;
  /// Copy with edge edits removed (text-only projection).
  PerturbationPlan text_only() const;
  bool operator==(const PerturbationPlan&) const = default;
};

struct NodeEditRecord {
  NodeId target = 0;
  std::int64_t edge_edits = 0;
  std::int64_t text_token_edits = 0;
};

/// Bookkeeping returned next to a perturbed graph.
struct PlanAudit {
  std::int64_t edge_edits = 0;
  std::int64_t text_token_edits = 0;
  std::int64_t text_nodes_changed = 0;
  std::vector<NodeEditRecord> per_node;
};

struct PerturbedGraph {
  TextAttributedGraph graph;
  PlanAudit audit;
};

/// Applies a plan to a graph, returning G' and its audit. The input is never
/// modified. Budget overruns raise Budget, plan/graph mismatches raise
/// PlanInconsistency.
PerturbedGraph apply_plan(const TextAttributedGraph& graph, const PerturbationPlan& plan,
                          const Budgets& budgets);

struct EditCounts {
  std::int64_t edge_edits = 0;
  std::int64_t text_edits = 0;
  double edge_ratio = 0.0;
};

EditCounts edit_counts(const TextAttributedGraph& clean, const TextAttributedGraph& perturbed);

}  // namespace tagsiege
