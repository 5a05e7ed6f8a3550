#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagsiege/graph.hpp"
#include "tagsiege/text.hpp"

namespace tagsiege {

enum class BackendKind { Llm, Oracle };

std::string_view to_string(BackendKind kind);

struct TopologyQuery {
  NodeId target = 0;
  std::string prompt;
  /// Neighbors as presented in the prompt; empty for isolated targets.
  std::vector<NodeId> neighbors;
  /// Candidates as presented in the prompt.
  std::vector<NodeId> candidates;
};

struct TopologyDecision {
  std::string reasoning_summary;
  std::optional<NodeId> delete_choice;
  std::optional<NodeId> add_choice;
  std::string justifications;
};

struct TextQuery {
  NodeId target = 0;
  NodeId influencer = 0;
  std::string prompt;
  std::string original_text;
  std::string influencer_text;
  std::int64_t token_budget = 0;
};

struct TextDecision {
  std::string keyword;
  std::string new_text;
  std::string rationale;
};

/// Answers the two combined prompts of the attack. Each call is one query.
class AttackerBackend {
 public:
  virtual ~AttackerBackend() = default;

  virtual BackendKind kind() const = 0;
  /// Throws Error(Backend) on transport failure and Error(ResponseFormat)
  /// when the reply cannot be parsed.
  virtual TopologyDecision decide_topology(const TopologyQuery& query) = 0;
  virtual TextDecision decide_text(const TextQuery& query) = 0;
};

/// Neighbor with the highest cosine similarity to the target in Z; ties to the lowest id.
NodeId oracle_select_deletion(const Eigen::MatrixXd& embeddings, NodeId target,
                              std::span<const NodeId> neighbors);

/// Candidate with the lowest cosine similarity to the target in Z; ties to the
/// lowest id. Candidates already adjacent to the target are passed over.
/// Throws RetrievalExhausted when nothing is left.
NodeId oracle_select_insertion(const Eigen::MatrixXd& embeddings, NodeId target,
                               std::span<const NodeId> candidates,
                               const TextAttributedGraph* graph = nullptr);

struct TextEdit {
  std::string keyword;
  std::string new_text;
};

/// Deterministic rewrite: keyword is the influencer's highest TF-IDF term not
/// in `excluded_terms`; the new text keeps the first ceil(n/2) original tokens,
/// appends the keyword and the influencer's next two terms, then sheds
/// additions and restores original tokens until the token edit fits `budget`.
/// Throws Config when budget < 1.
TextEdit oracle_text_edit(std::string_view original_text, std::string_view influencer_text,
                          const Vocabulary& vocab, const std::set<std::string>& excluded_terms,
                          std::int64_t budget);

/// Empty when the edit satisfies every text constraint, otherwise a
/// human-readable description of the first violation.
std::string text_edit_violation(std::string_view original_text, std::string_view keyword,
                                std::string_view new_text, std::int64_t budget);

/// Deterministic stand-in for the LLM: embedding similarity for topology and
/// TF-IDF term ranking for text. Pure and reentrant.
class OracleBackend final : public AttackerBackend {
 public:
  OracleBackend(const TextAttributedGraph& graph, Eigen::MatrixXd embeddings,
                const Vocabulary& vocab);

  BackendKind kind() const override { return BackendKind::Oracle; }
  TopologyDecision decide_topology(const TopologyQuery& query) override;
  TextDecision decide_text(const TextQuery& query) override;

  const Eigen::MatrixXd& embeddings() const noexcept { return embeddings_; }

 private:
  const TextAttributedGraph& graph_;
  Eigen::MatrixXd embeddings_;
  const Vocabulary& vocab_;
  /// Terms occurring in the texts of each class.
  std::vector<std::set<std::string>> class_terms_;
};

struct LlmConfig {
  std::string base_url = "https://api.deepseek.com";
  std::string model = "deepseek-chat";
  double temperature = 0.0;
  double timeout_seconds = 60.0;
  int max_attempts = 3;
  double backoff_seconds = 1.0;
  std::string api_key;
  /// Request/response bodies are written here (token redacted) when set.
  std::ostream* trace = nullptr;
};

struct LlmUsage {
  std::size_t requests = 0;
  std::size_t failed_attempts = 0;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

/// Chat-completion client speaking the common hosted-LLM JSON protocol:
/// POST {base_url}/chat/completions with a bearer token.
class LlmBackend final : public AttackerBackend {
 public:
  explicit LlmBackend(LlmConfig config);

  BackendKind kind() const override { return BackendKind::Llm; }
  TopologyDecision decide_topology(const TopologyQuery& query) override;
  TextDecision decide_text(const TextQuery& query) override;

  const LlmUsage& usage() const noexcept { return usage_; }
  /// Issues one chat completion with retries and returns the message content.
  std::string complete(const std::string& prompt);

 private:
  LlmConfig config_;
  LlmUsage usage_;
};

/// Extracts the first balanced JSON object from model output, tolerating
/// markdown code fences and surrounding prose. Throws ResponseFormat.
std::string extract_json_object(std::string_view content);

}  // namespace tagsiege
