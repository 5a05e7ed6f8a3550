#include "tagsiege/graph.hpp"

#include <algorithm>
#include <iterator>
#include <limits>
#include <set>
#include <string>

#include "tagsiege/errors.hpp"
#include "tagsiege/text.hpp"

namespace tagsiege {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "val") return Split::Val;
  if (text == "test") return Split::Test;
  fail(ErrorKind::Validation, "unknown split '" + std::string(text) + "'");
}

TextAttributedGraph::TextAttributedGraph(std::vector<std::string> texts,
                                         std::vector<ClassId> labels, std::vector<Split> splits,
                                         std::vector<Edge> edges, int class_count)
    : texts_(std::move(texts)),
      labels_(std::move(labels)),
      splits_(std::move(splits)),
      class_count_(class_count) {
  const std::size_t n = texts_.size();
  if (labels_.size() != n || splits_.size() != n) {
    fail(ErrorKind::Validation, "texts, labels and splits must have one entry per node");
  }
  if (class_count_ < 1) fail(ErrorKind::Validation, "class_count must be >= 1");
  for (std::size_t i = 0; i < n; ++i) {
    if (texts_[i].empty()) {
      fail(ErrorKind::Validation, "node " + std::to_string(i) + " has empty text");
    }
    if (labels_[i] < 0 || labels_[i] >= class_count_) {
      fail(ErrorKind::Validation, "node " + std::to_string(i) + " has label " +
                                      std::to_string(labels_[i]) + " outside [0, " +
                                      std::to_string(class_count_) + ")");
    }
  }
  for (Edge& e : edges) {
    if (e.u == e.v) fail(ErrorKind::Validation, "self-loop on node " + std::to_string(e.u));
    if (e.u >= n || e.v >= n) {
      fail(ErrorKind::Validation, "edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                      ") references a node outside [0, " + std::to_string(n) +
                                      ")");
    }
    e = Edge::make(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  adjacency_.assign(n, {});
  for (const Edge& e : edges_) {
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

bool TextAttributedGraph::has_edge(NodeId a, NodeId b) const {
  if (a >= node_count() || b >= node_count()) return false;
  const auto& list = adjacency_[a];
  return std::binary_search(list.begin(), list.end(), b);
}

std::vector<NodeId> TextAttributedGraph::nodes_in(Split split) const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < splits_.size(); ++i) {
    if (splits_[i] == split) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

bool TextAttributedGraph::operator==(const TextAttributedGraph& other) const {
  return class_count_ == other.class_count_ && texts_ == other.texts_ &&
         labels_ == other.labels_ && splits_ == other.splits_ && edges_ == other.edges_;
}

void Budgets::validate() const {
  if (per_node_edge_budget < 0 || global_edge_budget < 0 || text_token_budget < 0 ||
      global_text_budget < 0) {
    fail(ErrorKind::Validation, "budgets must be non-negative");
  }
}

PerturbationPlan PerturbationPlan::structure_only() const {
  PerturbationPlan out = *this;
  for (auto& [id, entry] : out.entries) {
    entry.keyword.reset();
    entry.new_text.reset();
  }
  return out;
}

PerturbationPlan PerturbationPlan::text_only() const {
  PerturbationPlan out = *this;
  for (auto& [id, entry] : out.entries) {
    entry.delete_neighbor.reset();
    entry.add_influencer.reset();
  }
  return out;
}

PerturbedGraph apply_plan(const TextAttributedGraph& graph, const PerturbationPlan& plan,
                          const Budgets& budgets) {
  budgets.validate();
  const std::size_t n = graph.node_count();
  std::set<Edge> edges(graph.edges().begin(), graph.edges().end());
  std::vector<std::string> texts = graph.texts();
  PlanAudit audit;

  for (const auto& [target, entry] : plan.entries) {
    const std::string node = "node " + std::to_string(target);
    if (target != entry.target) {
      fail(ErrorKind::PlanInconsistency, node + ": entry key does not match its target field");
    }
    if (target >= n) fail(ErrorKind::PlanInconsistency, node + " is outside the graph");

    NodeEditRecord record{target, 0, 0};
    const std::int64_t structural = entry.edge_edit_count();
    if (structural > budgets.per_node_edge_budget) {
      fail(ErrorKind::Budget, node + " requests " + std::to_string(structural) +
                                  " edge edits, per-node budget is " +
                                  std::to_string(budgets.per_node_edge_budget));
    }
    if (entry.delete_neighbor) {
      const NodeId other = *entry.delete_neighbor;
      if (other >= n || !edges.erase(Edge::make(target, other))) {
        fail(ErrorKind::PlanInconsistency,
             node + ": cannot delete non-existent edge to " + std::to_string(other));
      }
    }
    if (entry.add_influencer) {
      const NodeId other = *entry.add_influencer;
      if (other >= n || other == target) {
        fail(ErrorKind::PlanInconsistency,
             node + ": invalid insertion endpoint " + std::to_string(other));
      }
      if (!edges.insert(Edge::make(target, other)).second) {
        fail(ErrorKind::PlanInconsistency,
             node + ": cannot insert existing edge to " + std::to_string(other));
      }
    }
    record.edge_edits = structural;
    audit.edge_edits += structural;
    if (audit.edge_edits > budgets.global_edge_budget) {
      fail(ErrorKind::Budget, node + " exceeds the global edge budget of " +
                                  std::to_string(budgets.global_edge_budget));
    }

    if (entry.new_text) {
      if (entry.new_text->empty()) fail(ErrorKind::PlanInconsistency, node + ": empty new text");
      const auto distance =
          static_cast<std::int64_t>(token_edit_distance(graph.text(target), *entry.new_text));
      if (distance > budgets.text_token_budget) {
        fail(ErrorKind::Budget, node + " text edit of " + std::to_string(distance) +
                                    " tokens exceeds the per-node budget of " +
                                    std::to_string(budgets.text_token_budget));
      }
      record.text_token_edits = distance;
      audit.text_token_edits += distance;
      if (audit.text_token_edits > budgets.global_text_budget) {
        fail(ErrorKind::Budget, node + " exceeds the global text budget of " +
                                    std::to_string(budgets.global_text_budget));
      }
      if (*entry.new_text != texts[target]) ++audit.text_nodes_changed;
      texts[target] = *entry.new_text;
    }
    audit.per_node.push_back(record);
  }

  TextAttributedGraph perturbed(std::move(texts), graph.labels(), graph.splits(),
                                std::vector<Edge>(edges.begin(), edges.end()),
                                graph.class_count());
  return PerturbedGraph{std::move(perturbed), std::move(audit)};
}

EditCounts edit_counts(const TextAttributedGraph& clean, const TextAttributedGraph& perturbed) {
  if (clean.node_count() != perturbed.node_count()) {
    fail(ErrorKind::Shape, "node counts differ: " + std::to_string(clean.node_count()) + " vs " +
                               std::to_string(perturbed.node_count()));
  }
  std::vector<Edge> diff;
  std::set_symmetric_difference(clean.edges().begin(), clean.edges().end(),
                                perturbed.edges().begin(), perturbed.edges().end(),
                                std::back_inserter(diff));
  EditCounts counts;
  counts.edge_edits = static_cast<std::int64_t>(diff.size());
  for (std::size_t i = 0; i < clean.node_count(); ++i) {
    if (clean.texts()[i] != perturbed.texts()[i]) ++counts.text_edits;
  }
  if (clean.edge_count() == 0) {
    counts.edge_ratio = counts.edge_edits == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    counts.edge_ratio =
        static_cast<double>(counts.edge_edits) / static_cast<double>(clean.edge_count());
  }
  return counts;
}

}  // namespace tagsiege
