#pragma once

#include <cstdint>
#include <span>

#include "tagsiege/graph.hpp"

namespace tagsiege {

// Structure-only reference attackers. Both honor the per-node and global edge
// budgets and never touch an edge already edited for an earlier target.

/// One uniformly random neighbor deletion and one uniformly random non-neighbor
/// insertion per target. Deterministic given seed.
PerturbationPlan rnd_attack(const TextAttributedGraph& graph, std::span<const NodeId> targets,
                            const Budgets& budgets, std::uint64_t seed);

/// Deletes the edge to the target's lowest-degree neighbor and inserts an edge
/// to the highest-degree non-neighbor in the graph; ties go to the lower id.
PerturbationPlan flip_attack(const TextAttributedGraph& graph, std::span<const NodeId> targets,
                             const Budgets& budgets);

}  // namespace tagsiege
