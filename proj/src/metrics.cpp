#include "tagsiege/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "tagsiege/errors.hpp"
#include "tagsiege/retrieval.hpp"

namespace tagsiege {

namespace {

void expect_feature_rows(const TextAttributedGraph& graph, const FeatureMatrix& features) {
  if (static_cast<std::size_t>(features.rows()) != graph.node_count()) {
    fail(ErrorKind::Shape, "feature rows do not match node count");
  }
}

double row_cosine(const FeatureMatrix& features, NodeId a, NodeId b) {
  return cosine_similarity(features.row(a).transpose(), features.row(b).transpose());
}

}  // namespace

double homophily_node(const TextAttributedGraph& graph, const FeatureMatrix& features) {
  expect_feature_rows(graph, features);
  if (graph.edge_count() == 0) fail(ErrorKind::DegenerateInput, "homophily needs at least one edge");
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const auto v = static_cast<NodeId>(i);
    const auto neighbors = graph.neighbors(v);
    if (neighbors.empty()) continue;
    double sum = 0.0;
    for (NodeId u : neighbors) sum += row_cosine(features, v, u);
    total += sum / static_cast<double>(neighbors.size());
    ++counted;
  }
  return total / static_cast<double>(counted);
}

double homophily_edge(const TextAttributedGraph& graph, const FeatureMatrix& features) {
  expect_feature_rows(graph, features);
  if (graph.edge_count() == 0) fail(ErrorKind::DegenerateInput, "homophily needs at least one edge");
  double total = 0.0;
  for (const Edge& e : graph.edges()) total += row_cosine(features, e.u, e.v);
  return total / static_cast<double>(graph.edge_count());
}

double label_homophily_edge(const TextAttributedGraph& graph) {
  if (graph.edge_count() == 0) fail(ErrorKind::DegenerateInput, "homophily needs at least one edge");
  std::size_t same = 0;
  for (const Edge& e : graph.edges()) same += graph.label(e.u) == graph.label(e.v) ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(graph.edge_count());
}

BoundAudit bound_audit(const TextAttributedGraph& clean, const TextAttributedGraph& perturbed,
                       const FeatureMatrix& clean_features, const FeatureMatrix& perturbed_features,
                       const Vocabulary& vocab) {
  const EditCounts counts = edit_counts(clean, perturbed);
  BoundAudit audit;
  audit.homophily_edge_clean = homophily_edge(clean, clean_features);
  audit.homophily_edge_perturbed = homophily_edge(perturbed, perturbed_features);
  audit.delta_homophily_edge = audit.homophily_edge_perturbed - audit.homophily_edge_clean;
  audit.homophily_node_clean = homophily_node(clean, clean_features);
  audit.homophily_node_perturbed = homophily_node(perturbed, perturbed_features);
  audit.delta_homophily_node = audit.homophily_node_perturbed - audit.homophily_node_clean;
  audit.edge_edits = counts.edge_edits;
  audit.edge_ratio = counts.edge_ratio;
  audit.text_nodes_changed = counts.text_edits;

  double drift_sum = 0.0;
  for (std::size_t i = 0; i < clean.node_count(); ++i) {
    if (clean.texts()[i] == perturbed.texts()[i]) continue;
    const auto row = static_cast<Eigen::Index>(i);
    const double drift =
        text_drift(clean_features.row(row).transpose(), perturbed_features.row(row).transpose());
    audit.tau_max = std::max(audit.tau_max, drift);
    drift_sum += drift;
  }
  if (counts.text_edits > 0) {
    audit.tau_mean = drift_sum / static_cast<double>(counts.text_edits);
    try {
      audit.lipschitz_estimate = estimate_lipschitz(clean.texts(), perturbed.texts(), vocab);
    } catch (const Error& e) {
      // Texts may differ only in formatting, which tokenizes to zero edits.
      if (e.kind() != ErrorKind::DegenerateInput) throw;
    }
  }
  const double denominator = audit.edge_ratio + audit.lipschitz_estimate.value_or(0.0) * audit.tau_max;
  const auto ratio = [&](double delta) {
    if (delta == 0.0) return 0.0;
    return denominator == 0.0 ? std::numeric_limits<double>::infinity()
                              : std::abs(delta) / denominator;
  };
  audit.ratio_edge = ratio(audit.delta_homophily_edge);
  audit.ratio_node = ratio(audit.delta_homophily_node);
  return audit;
}

Aggregates aggregate(std::span<const double> accuracies) {
  if (accuracies.empty()) fail(ErrorKind::DegenerateInput, "aggregate needs at least one accuracy");
  std::vector<double> sorted(accuracies.begin(), accuracies.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  Aggregates out;
  out.average = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  if (sorted.size() >= 3) out.three_max = (sorted[0] + sorted[1] + sorted[2]) / 3.0;
  double weight = 1.0;
  double weight_sum = 0.0;
  double weighted = 0.0;
  for (double acc : sorted) {
    weighted += weight * acc;
    weight_sum += weight;
    weight *= 0.5;
  }
  out.weighted = weighted / weight_sum;
  return out;
}

SynergyResult synergy_test(const TextAttributedGraph& clean, const PerturbationPlan& plan,
                           const Budgets& budgets, std::span<const VictimModel> victims,
                           const Vocabulary& vocab, std::span<const NodeId> targets) {
  const FeatureMatrix clean_features = featurize(clean.texts(), vocab);
  const auto perturb = [&](const PerturbationPlan& p) {
    PerturbedGraph g = apply_plan(clean, p, budgets);
    FeatureMatrix x = featurize(g.graph.texts(), vocab);
    return std::pair{std::move(g.graph), std::move(x)};
  };
  const auto structural = perturb(plan.structure_only());
  const auto textual = perturb(plan.text_only());
  const auto joint = perturb(plan);

  SynergyResult result;
  for (const VictimModel& victim : victims) {
    SynergyRow row;
    row.victim = victim.kind();
    row.clean_accuracy = accuracy(victim, clean, clean_features, targets);
    row.drop_struct = row.clean_accuracy - accuracy(victim, structural.first, structural.second, targets);
    row.drop_text = row.clean_accuracy - accuracy(victim, textual.first, textual.second, targets);
    row.drop_joint = row.clean_accuracy - accuracy(victim, joint.first, joint.second, targets);
    row.hard = row.drop_joint >= std::max(row.drop_struct, row.drop_text);
    row.soft = row.drop_joint > row.drop_struct + row.drop_text;
    result.hard_all = result.hard_all && row.hard;
    result.soft_count += row.soft ? 1 : 0;
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace tagsiege
