#include "tagsiege/attack.hpp"

#include <algorithm>
#include <optional>

#include "tagsiege/errors.hpp"
#include "tagsiege/rng.hpp"

namespace tagsiege {

namespace {

bool contains(std::span<const NodeId> ids, NodeId id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

std::string node_line(const TextAttributedGraph& graph, NodeId v) {
  return "- [" + std::to_string(v) + "] " + graph.text(v) + "\n";
}

std::string trim_trailing_newline(std::string s) {
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

}  // namespace

TopologyPrompt build_topology_prompt(const TextAttributedGraph& graph, NodeId target,
                                     const InfluencerSet& influencers,
                                     const PromptTemplate& tmpl, std::uint64_t seed,
                                     bool allow_isolated, const std::set<Edge>* locked) {
  if (target >= graph.node_count()) {
    fail(ErrorKind::Index, "target " + std::to_string(target) + " outside the graph");
  }
  if (tmpl.kind() != PromptKind::Topology) {
    fail(ErrorKind::Template, "topology prompt needs a topology template");
  }
  const auto is_locked = [&](NodeId other) {
    return locked != nullptr && locked->contains(Edge::make(target, other));
  };

  TopologyPrompt prompt;
  for (NodeId v : graph.neighbors(target)) {
    if (!is_locked(v)) prompt.neighbors.push_back(v);
  }
  if (prompt.neighbors.empty() && !allow_isolated) {
    fail(ErrorKind::IsolatedNode, "target " + std::to_string(target) + " has no neighbor to delete");
  }
  for (const Candidate& c : influencers.candidates) {
    if (c.node == target || graph.has_edge(target, c.node) || is_locked(c.node)) continue;
    prompt.candidates.push_back(c.node);
  }
  if (prompt.candidates.empty()) {
    fail(ErrorKind::RetrievalExhausted,
         "no insertable influencer left for target " + std::to_string(target));
  }
  auto rng = substream(seed, "attack/candidate-order/" + std::to_string(target));
  for (std::size_t i = prompt.candidates.size(); i > 1; --i) {
    std::swap(prompt.candidates[i - 1], prompt.candidates[uniform_index(rng, i)]);
  }

  std::string neighbor_list;
  for (NodeId v : prompt.neighbors) neighbor_list += node_line(graph, v);
  if (neighbor_list.empty()) neighbor_list = "(none)\n";
  std::string candidate_list;
  for (NodeId v : prompt.candidates) candidate_list += node_line(graph, v);

  prompt.text = tmpl.render({{"target_text", "[" + std::to_string(target) + "] " + graph.text(target)},
                             {"neighbor_list", trim_trailing_newline(neighbor_list)},
                             {"candidate_list", trim_trailing_newline(candidate_list)}});
  return prompt;
}

std::string build_text_prompt(const TextAttributedGraph& graph, NodeId target, NodeId influencer,
                              const PromptTemplate& tmpl) {
  if (target >= graph.node_count() || influencer >= graph.node_count()) {
    fail(ErrorKind::Index, "text prompt node outside the graph");
  }
  if (tmpl.kind() != PromptKind::Text) fail(ErrorKind::Template, "text prompt needs a text template");
  return tmpl.render({{"target_text", graph.text(target)},
                      {"influencer_text", graph.text(influencer)}});
}

Selection select_deletion(const TopologyDecision& decision, std::span<const NodeId> neighbor_ids,
                          const Eigen::MatrixXd& embeddings, NodeId target) {
  if (neighbor_ids.empty()) fail(ErrorKind::IsolatedNode, "no neighbor to delete");
  if (decision.delete_choice && contains(neighbor_ids, *decision.delete_choice)) {
    return {*decision.delete_choice, false};
  }
  return {oracle_select_deletion(embeddings, target, neighbor_ids), true};
}

Selection select_insertion(const TopologyDecision& decision, std::span<const NodeId> candidate_ids,
                           const Eigen::MatrixXd& embeddings, NodeId target,
                           const TextAttributedGraph& graph) {
  if (candidate_ids.empty()) fail(ErrorKind::RetrievalExhausted, "empty candidate pool");
  if (decision.add_choice && contains(candidate_ids, *decision.add_choice) &&
      !graph.has_edge(target, *decision.add_choice) && *decision.add_choice != target) {
    return {*decision.add_choice, false};
  }
  return {oracle_select_insertion(embeddings, target, candidate_ids, &graph), true};
}

namespace {

std::string topology_violation(const TopologyDecision& d, const TopologyPrompt& p) {
  if (!p.neighbors.empty() && (!d.delete_choice || !contains(p.neighbors, *d.delete_choice))) {
    return "delete_id must be one of the ids in the neighboring set";
  }
  if (!d.add_choice || !contains(p.candidates, *d.add_choice)) {
    return "add_id must be one of the ids in the Candidate List";
  }
  return {};
}

std::string feedback(const std::string& prompt, const std::string& violation) {
  return prompt + "\nYour previous answer was rejected: " + violation +
         ". Answer again following every requirement.\n";
}

/// Another retrieved influencer for the mis-anchored ablation, preferring one
/// whose label differs from the aligned anchor's.
NodeId misaligned_anchor(const TextAttributedGraph& graph, const InfluencerSet& influencers,
                         NodeId target, NodeId anchor) {
  std::optional<NodeId> fallback;
  for (const Candidate& c : influencers.candidates) {
    if (c.node == anchor || c.node == target) continue;
    if (graph.label(c.node) != graph.label(anchor)) return c.node;
    if (!fallback) fallback = c.node;
  }
  return fallback.value_or(anchor);
}

}  // namespace

AttackResult attack(const TextAttributedGraph& graph, std::span<const NodeId> targets,
                    const Eigen::MatrixXd& embeddings, AttackerBackend& backend,
                    const Vocabulary& vocab, const AttackConfig& config) {
  config.budgets.validate();
  if (config.budgets.text_token_budget < 1) {
    fail(ErrorKind::Config, "text token budget must be >= 1");
  }
  if (static_cast<std::size_t>(embeddings.rows()) != graph.node_count()) {
    fail(ErrorKind::Shape, "embeddings do not match the graph");
  }
  for (NodeId t : targets) {
    if (t >= graph.node_count()) {
      fail(ErrorKind::Index, "target " + std::to_string(t) + " outside the graph");
    }
  }

  OracleBackend oracle(graph, embeddings, vocab);
  AttackResult result;
  std::set<Edge> locked;
  std::set<NodeId> seen;
  std::int64_t edge_used = 0;
  std::int64_t text_used = 0;
  std::size_t backend_skips = 0;

  auto skip = [&](NodeId target, const std::string& reason) {
    result.plan.skipped.push_back({target, reason});
  };

  for (NodeId target : targets) {
    if (!seen.insert(target).second) continue;

    const std::int64_t edge_allowance =
        std::min(config.budgets.per_node_edge_budget, config.budgets.global_edge_budget - edge_used);
    const std::int64_t text_allowance =
        std::min(config.budgets.text_token_budget, config.budgets.global_text_budget - text_used);
    if (text_allowance < 1) {
      skip(target, "global text budget exhausted");
      continue;
    }

    const InfluencerSet influencers =
        retrieve_influencers(embeddings, target, config.influencer_count);
    TopologyPrompt tp;
    try {
      tp = build_topology_prompt(graph, target, influencers, config.templates.topology, config.seed,
                                 /*allow_isolated=*/true, &locked);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::RetrievalExhausted) throw;
      skip(target, e.what());
      continue;
    }

    PlanEntry entry;
    entry.target = target;
    std::size_t queries = 0;

    // Query 1: the three topology steps.
    TopologyQuery tq{target, tp.text + topology_response_instruction(), tp.neighbors, tp.candidates};
    TopologyDecision decision;
    bool answered = false;
    try {
      ++queries;
      std::string violation;
      try {
        decision = backend.decide_topology(tq);
        violation = topology_violation(decision, tp);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::ResponseFormat) throw;
        violation = e.what();
      }
      if (!violation.empty()) {
        ++result.stats.retries;
        TopologyQuery retry = tq;
        retry.prompt = feedback(tq.prompt, violation);
        try {
          decision = backend.decide_topology(retry);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::ResponseFormat) throw;
          decision = {};
        }
      }
      answered = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Backend) throw;
      ++result.stats.backend_failures;
      ++backend_skips;
      result.stats.abandoned_queries += queries;
      skip(target, std::string("backend failure: ") + e.what());
    }
    if (!answered) continue;

    const Selection add = select_insertion(decision, tp.candidates, embeddings, target, graph);
    std::optional<Selection> del;
    if (!tp.neighbors.empty()) del = select_deletion(decision, tp.neighbors, embeddings, target);
    entry.fallback = add.fell_back || (del && del->fell_back);
    if (edge_allowance >= 1) entry.add_influencer = add.node;
    if (edge_allowance >= 2 && del) entry.delete_neighbor = del->node;

    // Query 2: the two text steps, anchored on the inserted influencer.
    NodeId anchor = add.node;
    if (config.anchor == AnchorMode::Misaligned) {
      anchor = misaligned_anchor(graph, influencers, target, add.node);
    }
    const std::string text_prompt = build_text_prompt(graph, target, anchor, config.templates.text) +
                                    text_response_instruction(text_allowance);
    TextQuery xq{target, anchor, text_prompt, graph.text(target), graph.text(anchor), text_allowance};
    TextDecision text;
    bool text_ok = false;
    try {
      ++queries;
      std::string violation;
      try {
        text = backend.decide_text(xq);
        violation = text_edit_violation(xq.original_text, text.keyword, text.new_text, text_allowance);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::ResponseFormat) throw;
        violation = e.what();
      }
      if (!violation.empty()) {
        ++result.stats.retries;
        TextQuery retry = xq;
        retry.prompt = feedback(xq.prompt, violation);
        try {
          text = backend.decide_text(retry);
          violation = text_edit_violation(xq.original_text, text.keyword, text.new_text,
                                          text_allowance);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::ResponseFormat) throw;
        }
        if (!violation.empty()) {
          text = oracle.decide_text(xq);
          entry.fallback = true;
        }
      }
      text_ok = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Backend) throw;
      ++result.stats.backend_failures;
      ++backend_skips;
      result.stats.abandoned_queries += queries;
      skip(target, std::string("backend failure: ") + e.what());
    }
    if (!text_ok) continue;

    entry.keyword = tokenize(text.keyword).front();
    entry.new_text = text.new_text;
    entry.intended_label = graph.label(add.node);
    entry.rationale = "R: " + decision.reasoning_summary;
    if (!decision.justifications.empty() && decision.justifications != decision.reasoning_summary) {
      entry.rationale += " | topology: " + decision.justifications;
    }
    if (!text.rationale.empty()) entry.rationale += " | text: " + text.rationale;
    if (anchor != add.node) entry.rationale += " | text anchored on " + std::to_string(anchor);
    if (entry.intended_label == graph.label(target)) {
      ++result.stats.noop_anchors;
      entry.rationale += " | no-op anchor: influencer shares the target label";
    }

    if (entry.delete_neighbor) locked.insert(Edge::make(target, *entry.delete_neighbor));
    if (entry.add_influencer) locked.insert(Edge::make(target, *entry.add_influencer));
    edge_used += entry.edge_edit_count();
    text_used += static_cast<std::int64_t>(token_edit_distance(graph.text(target), *entry.new_text));
    if (entry.fallback) ++result.stats.fallbacks;
    result.stats.queries += queries;
    ++result.stats.completed;
    result.plan.entries.emplace(target, std::move(entry));
  }

  if (!seen.empty() && result.stats.completed == 0) {
    std::string reasons;
    for (const auto& s : result.plan.skipped) reasons += "\n  " + std::to_string(s.target) + ": " + s.reason;
    fail(backend_skips > 0 ? ErrorKind::Backend : ErrorKind::RetrievalExhausted,
         "every target was skipped:" + reasons);
  }
  return result;
}

}  // namespace tagsiege
