#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tagsiege/graph.hpp"
#include "tagsiege/text.hpp"
#include "tagsiege/victims.hpp"

namespace tagsiege {

/// Mean over non-isolated nodes of the mean feature cosine to each neighbor.
/// Throws DegenerateInput when the graph has no edges.
double homophily_node(const TextAttributedGraph& graph, const FeatureMatrix& features);

/// Mean over edges of the endpoint feature cosine.
double homophily_edge(const TextAttributedGraph& graph, const FeatureMatrix& features);

/// Fraction of edges joining equal labels. Reference variant used in tests.
double label_homophily_edge(const TextAttributedGraph& graph);

struct BoundAudit {
  double homophily_edge_clean = 0.0;
  double homophily_edge_perturbed = 0.0;
  double delta_homophily_edge = 0.0;
  double homophily_node_clean = 0.0;
  double homophily_node_perturbed = 0.0;
  double delta_homophily_node = 0.0;
  std::int64_t edge_edits = 0;
  double edge_ratio = 0.0;
  std::int64_t text_nodes_changed = 0;
  double tau_max = 0.0;
  double tau_mean = 0.0;
  /// Absent when no text changed.
  std::optional<double> lipschitz_estimate;
  /// |dH| / (edge_ratio + L * tau_max); 0 when both sides vanish.
  double ratio_edge = 0.0;
  double ratio_node = 0.0;
};

/// Reports every component of the homophily bound instead of asserting it,
/// since its constants are unknown.
BoundAudit bound_audit(const TextAttributedGraph& clean, const TextAttributedGraph& perturbed,
                       const FeatureMatrix& clean_features, const FeatureMatrix& perturbed_features,
                       const Vocabulary& vocab);

struct Aggregates {
  double average = 0.0;
  /// Mean of the three largest values; absent with fewer than three.
  std::optional<double> three_max;
  /// Sorted descending, weights 2^-i normalized.
  double weighted = 0.0;
};

/// Throws DegenerateInput on an empty input.
Aggregates aggregate(std::span<const double> accuracies);

struct SynergyRow {
  VictimKind victim = VictimKind::Gcn;
  double clean_accuracy = 0.0;
  double drop_struct = 0.0;
  double drop_text = 0.0;
  double drop_joint = 0.0;
  /// drop_joint >= max(drop_struct, drop_text).
  bool hard = true;
  /// drop_joint > drop_struct + drop_text.
  bool soft = false;
};

struct SynergyResult {
  std::vector<SynergyRow> rows;
  bool hard_all = true;
  std::size_t soft_count = 0;
};

/// Evaluates the structure-only, text-only and full projections of a plan on
/// every victim, measuring accuracy on `targets`. Features are rebuilt with
/// the clean vocabulary.
SynergyResult synergy_test(const TextAttributedGraph& clean, const PerturbationPlan& plan,
                           const Budgets& budgets, std::span<const VictimModel> victims,
                           const Vocabulary& vocab, std::span<const NodeId> targets);

}  // namespace tagsiege
