#include "tagsiege/baselines.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <string>

#include "tagsiege/errors.hpp"
#include "tagsiege/rng.hpp"

namespace tagsiege {

namespace {

/// Shared walk over targets: budget accounting and edge locking, with the
/// per-target choice of deletion/insertion delegated to `choose`.
template <typename Choose>
PerturbationPlan structural_plan(const TextAttributedGraph& graph, std::span<const NodeId> targets,
                                 const Budgets& budgets, const char* name, Choose choose) {
  budgets.validate();
  PerturbationPlan plan;
  std::set<Edge> locked;
  std::set<NodeId> seen;
  std::int64_t used = 0;
  for (NodeId target : targets) {
    if (target >= graph.node_count()) {
      fail(ErrorKind::Index, "target " + std::to_string(target) + " outside the graph");
    }
    if (!seen.insert(target).second) continue;
    const std::int64_t allowance =
        std::min(budgets.per_node_edge_budget, budgets.global_edge_budget - used);
    if (allowance <= 0) continue;

    std::vector<NodeId> neighbors;
    for (NodeId v : graph.neighbors(target)) {
      if (!locked.contains(Edge::make(target, v))) neighbors.push_back(v);
    }
    std::vector<NodeId> outsiders;
    for (NodeId v = 0; v < graph.node_count(); ++v) {
      if (v != target && !graph.has_edge(target, v) && !locked.contains(Edge::make(target, v))) {
        outsiders.push_back(v);
      }
    }

    PlanEntry entry;
    entry.target = target;
    auto [del, add] = choose(target, neighbors, outsiders);
    if (add) entry.add_influencer = add;
    if (del && allowance >= 2) entry.delete_neighbor = del;
    if (del && !add && allowance >= 1) entry.delete_neighbor = del;
    if (entry.edge_edit_count() == 0) {
      plan.skipped.push_back({target, "no admissible edge edit"});
      continue;
    }
    entry.intended_label = entry.add_influencer ? graph.label(*entry.add_influencer)
                                                : graph.label(target);
    entry.rationale = name;
    if (entry.delete_neighbor) locked.insert(Edge::make(target, *entry.delete_neighbor));
    if (entry.add_influencer) locked.insert(Edge::make(target, *entry.add_influencer));
    used += entry.edge_edit_count();
    plan.entries.emplace(target, std::move(entry));
  }
  return plan;
}

}  // namespace

PerturbationPlan rnd_attack(const TextAttributedGraph& graph, std::span<const NodeId> targets,
                            const Budgets& budgets, std::uint64_t seed) {
  return structural_plan(
      graph, targets, budgets, "rnd",
      [&](NodeId target, const std::vector<NodeId>& neighbors, const std::vector<NodeId>& outsiders) {
        auto rng = substream(seed, "rnd/" + std::to_string(target));
        std::optional<NodeId> del;
        std::optional<NodeId> add;
        if (!neighbors.empty()) del = neighbors[uniform_index(rng, neighbors.size())];
        if (!outsiders.empty()) add = outsiders[uniform_index(rng, outsiders.size())];
        return std::pair{del, add};
      });
}

PerturbationPlan flip_attack(const TextAttributedGraph& graph, std::span<const NodeId> targets,
                             const Budgets& budgets) {
  return structural_plan(
      graph, targets, budgets, "flip",
      [&](NodeId, const std::vector<NodeId>& neighbors, const std::vector<NodeId>& outsiders) {
        std::optional<NodeId> del;
        std::optional<NodeId> add;
        for (NodeId v : neighbors) {  // ascending ids, so strict < keeps the lowest on ties
          if (!del || graph.degree(v) < graph.degree(*del)) del = v;
        }
        for (NodeId v : outsiders) {
          if (!add || graph.degree(v) > graph.degree(*add)) add = v;
        }
        return std::pair{del, add};
      });
}

}  // namespace tagsiege
