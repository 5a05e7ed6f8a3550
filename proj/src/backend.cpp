#include "tagsiege/backend.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "tagsiege/errors.hpp"
#include "tagsiege/retrieval.hpp"

namespace tagsiege {

using nlohmann::json;

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::Llm ? "llm" : "oracle";
}

NodeId oracle_select_deletion(const Eigen::MatrixXd& embeddings, NodeId target,
                              std::span<const NodeId> neighbors) {
  if (neighbors.empty()) fail(ErrorKind::IsolatedNode, "no neighbor to delete");
  const Eigen::VectorXd z = embeddings.row(target).transpose();
  NodeId best = neighbors.front();
  double best_similarity = -2.0;
  for (NodeId v : neighbors) {
    const double s = cosine_similarity(z, embeddings.row(v).transpose());
    if (s > best_similarity || (s == best_similarity && v < best)) {
      best = v;
      best_similarity = s;
    }
  }
  return best;
}

NodeId oracle_select_insertion(const Eigen::MatrixXd& embeddings, NodeId target,
                               std::span<const NodeId> candidates,
                               const TextAttributedGraph* graph) {
  const Eigen::VectorXd z = embeddings.row(target).transpose();
  std::optional<NodeId> best;
  double best_similarity = 2.0;
  for (NodeId v : candidates) {
    if (v == target || (graph && graph->has_edge(target, v))) continue;
    // Dissimilarity carries the zero-row convention, so rank by 1 - d.
    const double s = 1.0 - cosine_dissimilarity(z, embeddings.row(v).transpose()).value;
    if (!best || s < best_similarity || (s == best_similarity && v < *best)) {
      best = v;
      best_similarity = s;
    }
  }
  if (!best) fail(ErrorKind::RetrievalExhausted, "every candidate is already adjacent");
  return *best;
}

namespace {

/// Vocabulary terms of `text` ranked by TF-IDF descending, ties lexicographic.
std::vector<std::string> ranked_terms(std::string_view text, const Vocabulary& vocab) {
  std::map<std::string, double> scores;
  for (const auto& token : tokenize(text)) {
    const auto index = vocab.index_of(token);
    if (index >= 0) scores[token] += vocab.idf(static_cast<std::size_t>(index));
  }
  std::vector<std::pair<std::string, double>> ranked(scores.begin(), scores.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (auto& [term, score] : ranked) out.push_back(term);
  return out;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

TextEdit oracle_text_edit(std::string_view original_text, std::string_view influencer_text,
                          const Vocabulary& vocab, const std::set<std::string>& excluded_terms,
                          std::int64_t budget) {
  if (budget < 1) fail(ErrorKind::Config, "text token budget must be >= 1 for text edits");
  std::vector<std::string> ranked = ranked_terms(influencer_text, vocab);
  if (ranked.empty()) {
    for (auto& token : tokenize(influencer_text)) {
      if (std::find(ranked.begin(), ranked.end(), token) == ranked.end()) ranked.push_back(token);
    }
  }
  if (ranked.empty()) fail(ErrorKind::DegenerateInput, "influencer text has no tokens");

  auto keyword_it = std::find_if(ranked.begin(), ranked.end(), [&](const std::string& term) {
    return !excluded_terms.contains(term);
  });
  if (keyword_it == ranked.end()) keyword_it = ranked.begin();
  const std::string keyword = *keyword_it;
  std::vector<std::string> extras;
  for (const auto& term : ranked) {
    if (term != keyword && extras.size() < 2) extras.push_back(term);
  }

  const std::vector<std::string> original = tokenize(original_text);
  std::size_t keep = (original.size() + 1) / 2;
  std::size_t extra_count = extras.size();
  std::string candidate;
  for (;;) {
    std::vector<std::string> tokens(original.begin(),
                                    original.begin() + static_cast<std::ptrdiff_t>(keep));
    tokens.push_back(keyword);
    tokens.insert(tokens.end(), extras.begin(),
                  extras.begin() + static_cast<std::ptrdiff_t>(extra_count));
    candidate = join(tokens);
    if (static_cast<std::int64_t>(token_edit_distance(original_text, candidate)) <= budget) break;
    if (keep < original.size()) {
      ++keep;
    } else if (extra_count > 0) {
      --extra_count;
    } else {
      break;  // unreachable for budget >= 1: all originals plus one keyword is one edit
    }
  }
  return TextEdit{keyword, candidate};
}

std::string text_edit_violation(std::string_view original_text, std::string_view keyword,
                                std::string_view new_text, std::int64_t budget) {
  const auto key_tokens = tokenize(keyword);
  if (key_tokens.size() != 1) return "keyword must be a single token";
  const auto fresh = tokenize(new_text);
  if (fresh.empty()) return "new text is empty";
  if (std::find(fresh.begin(), fresh.end(), key_tokens.front()) == fresh.end()) {
    return "new text does not contain the keyword";
  }
  const auto distance = static_cast<std::int64_t>(token_edit_distance(original_text, new_text));
  if (distance > budget) {
    return "token edit " + std::to_string(distance) + " exceeds budget " + std::to_string(budget);
  }
  const auto original = tokenize(original_text);
  if (!original.empty()) {
    std::map<std::string, long> counts;
    for (const auto& t : original) ++counts[t];
    std::size_t retained = 0;
    for (const auto& t : fresh) {
      auto it = counts.find(t);
      if (it != counts.end() && it->second > 0) {
        --it->second;
        ++retained;
      }
    }
    if (retained == 0) return "new text shares no token with the original";
    if (static_cast<double>(retained) < 0.3 * static_cast<double>(original.size())) {
      return "new text retains fewer than 30% of the original tokens";
    }
  }
  return {};
}

OracleBackend::OracleBackend(const TextAttributedGraph& graph, Eigen::MatrixXd embeddings,
                             const Vocabulary& vocab)
    : graph_(graph), embeddings_(std::move(embeddings)), vocab_(vocab) {
  if (static_cast<std::size_t>(embeddings_.rows()) != graph_.node_count()) {
    fail(ErrorKind::Shape, "oracle embeddings do not match the graph");
  }
  class_terms_.resize(static_cast<std::size_t>(graph_.class_count()));
  for (std::size_t i = 0; i < graph_.node_count(); ++i) {
    auto& terms = class_terms_[static_cast<std::size_t>(graph_.labels()[i])];
    for (auto& token : tokenize(graph_.texts()[i])) terms.insert(std::move(token));
  }
}

TopologyDecision OracleBackend::decide_topology(const TopologyQuery& query) {
  TopologyDecision decision;
  const Eigen::VectorXd z = embeddings_.row(query.target).transpose();
  if (!query.neighbors.empty()) {
    decision.delete_choice = oracle_select_deletion(embeddings_, query.target, query.neighbors);
  }
  decision.add_choice =
      oracle_select_insertion(embeddings_, query.target, query.candidates, &graph_);
  decision.reasoning_summary = "embedding oracle";
  std::string why;
  if (decision.delete_choice) {
    why += "delete " + std::to_string(*decision.delete_choice) + " (cos " +
           std::to_string(cosine_similarity(z, embeddings_.row(*decision.delete_choice).transpose())) +
           ")";
  }
  if (!why.empty()) why += "; ";
  why += "add " + std::to_string(*decision.add_choice) + " (dissim " +
         std::to_string(
             cosine_dissimilarity(z, embeddings_.row(*decision.add_choice).transpose()).value) +
         ")";
  decision.justifications = why;
  return decision;
}

TextDecision OracleBackend::decide_text(const TextQuery& query) {
  const auto& excluded = class_terms_.at(static_cast<std::size_t>(graph_.label(query.target)));
  TextEdit edit = oracle_text_edit(query.original_text, query.influencer_text, vocab_, excluded,
                                   query.token_budget);
  TextDecision decision;
  decision.rationale = "keyword '" + edit.keyword + "' from influencer " +
                       std::to_string(query.influencer);
  decision.keyword = std::move(edit.keyword);
  decision.new_text = std::move(edit.new_text);
  return decision;
}

std::string extract_json_object(std::string_view content) {
  const auto start = content.find('{');
  if (start == std::string_view::npos) fail(ErrorKind::ResponseFormat, "no JSON object in reply");
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < content.size(); ++i) {
    const char c = content[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      return std::string(content.substr(start, i - start + 1));
    }
  }
  fail(ErrorKind::ResponseFormat, "unbalanced JSON object in reply");
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix + /chat/completions
};

Endpoint parse_endpoint(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    fail(ErrorKind::Config, "base URL must include a scheme: " + base_url);
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = base_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  ep.path = prefix + "/chat/completions";
  return ep;
}

json parse_reply(const std::string& content) {
  try {
    json doc = json::parse(extract_json_object(content));
    if (!doc.is_object()) fail(ErrorKind::ResponseFormat, "reply is not a JSON object");
    return doc;
  } catch (const json::exception& e) {
    fail(ErrorKind::ResponseFormat, std::string("malformed JSON reply: ") + e.what());
  }
}

std::optional<NodeId> node_field(const json& doc, const char* key, bool required) {
  const auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) {
    if (required) fail(ErrorKind::ResponseFormat, std::string("reply lacks ") + key);
    return std::nullopt;
  }
  if (it->is_number_integer() && it->get<std::int64_t>() >= 0) return it->get<NodeId>();
  if (it->is_string()) {
    const std::string s = it->get<std::string>();
    try {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used == s.size() && v >= 0) return static_cast<NodeId>(v);
    } catch (const std::exception&) {
    }
  }
  fail(ErrorKind::ResponseFormat, std::string(key) + " is not a node id");
}

std::string string_field(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end() || !it->is_string()) {
    fail(ErrorKind::ResponseFormat, std::string("reply lacks string field ") + key);
  }
  return it->get<std::string>();
}

}  // namespace

LlmBackend::LlmBackend(LlmConfig config) : config_(std::move(config)) {
  parse_endpoint(config_.base_url);
  if (config_.max_attempts < 1) fail(ErrorKind::Config, "max_attempts must be >= 1");
}

std::string LlmBackend::complete(const std::string& prompt) {
  const Endpoint ep = parse_endpoint(config_.base_url);
  const json request = {{"model", config_.model},
                        {"temperature", config_.temperature},
                        {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
                        {"response_format", {{"type", "json_object"}}}};
  const std::string body = request.dump();
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error = "no attempt made";
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      const double delay = config_.backoff_seconds * std::pow(2.0, attempt - 2);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    ++usage_.requests;
    if (config_.trace) {
      *config_.trace << "--> POST " << ep.origin << ep.path << " (attempt " << attempt << ")\n"
                     << "    Authorization: Bearer " << (config_.api_key.empty() ? "" : "***")
                     << "\n    " << body << "\n";
    }
    try {
      httplib::Client client(ep.origin);
      const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
      client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      const auto result = client.Post(ep.path, headers, body, "application/json");
      if (!result) {
        last_error = "transport error: " + httplib::to_string(result.error());
      } else {
        if (config_.trace) {
          *config_.trace << "<-- " << result->status << "\n    " << result->body << "\n";
        }
        if (result->status == 200) {
          const json reply = json::parse(result->body);
          std::string content = reply.at("choices").at(0).at("message").at("content");
          if (reply.contains("usage") && reply["usage"].is_object()) {
            usage_.prompt_tokens += reply["usage"].value("prompt_tokens", std::size_t{0});
            usage_.completion_tokens += reply["usage"].value("completion_tokens", std::size_t{0});
          } else {
            usage_.prompt_tokens += prompt.size() / 4;
            usage_.completion_tokens += content.size() / 4;
          }
          return content;
        }
        last_error = "HTTP " + std::to_string(result->status);
      }
    } catch (const json::exception& e) {
      last_error = std::string("malformed completion envelope: ") + e.what();
    }
    ++usage_.failed_attempts;
  }
  fail(ErrorKind::Backend, "LLM request failed after " + std::to_string(config_.max_attempts) +
                               " attempts: " + last_error);
}

TopologyDecision LlmBackend::decide_topology(const TopologyQuery& query) {
  const json doc = parse_reply(complete(query.prompt));
  TopologyDecision decision;
  decision.delete_choice = node_field(doc, "delete_id", false);
  decision.add_choice = node_field(doc, "add_id", true);
  decision.reasoning_summary = doc.value("rationale", std::string{});
  decision.justifications = decision.reasoning_summary;
  return decision;
}

TextDecision LlmBackend::decide_text(const TextQuery& query) {
  const json doc = parse_reply(complete(query.prompt));
  TextDecision decision;
  decision.keyword = string_field(doc, "keyword");
  decision.new_text = string_field(doc, "new_text");
  decision.rationale = doc.value("rationale", std::string{});
  return decision;
}

}  // namespace tagsiege
