#include "tagsiege/prompt.hpp"

#include <set>

#include "tagsiege/errors.hpp"
#include "tagsiege/io.hpp"

namespace tagsiege {

namespace {

const std::set<std::string, std::less<>> kKnownPlaceholders = {
    "target_text", "neighbor_list", "candidate_list", "influencer_text"};

std::set<std::string, std::less<>> required_for(PromptKind kind) {
  if (kind == PromptKind::Topology) return {"target_text", "neighbor_list", "candidate_list"};
  return {"target_text", "influencer_text"};
}

/// Walks the template, calling on_text for literal spans and on_slot for placeholders.
template <typename OnText, typename OnSlot>
void scan(const std::string& text, OnText on_text, OnSlot on_slot) {
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '{' && i + 1 < text.size() && text[i + 1] == '{') {
      on_text("{");
      i += 2;
    } else if (c == '}' && i + 1 < text.size() && text[i + 1] == '}') {
      on_text("}");
      i += 2;
    } else if (c == '{') {
      const auto close = text.find('}', i + 1);
      if (close == std::string::npos) fail(ErrorKind::Template, "unterminated placeholder");
      on_slot(std::string_view(text).substr(i + 1, close - i - 1));
      i = close + 1;
    } else if (c == '}') {
      fail(ErrorKind::Template, "stray '}' at offset " + std::to_string(i));
    } else {
      const auto next = text.find_first_of("{}", i);
      const auto end = next == std::string::npos ? text.size() : next;
      on_text(std::string_view(text).substr(i, end - i));
      i = end;
    }
  }
}

}  // namespace

PromptTemplate::PromptTemplate(PromptKind kind, std::string text)
    : kind_(kind), text_(std::move(text)) {
  std::set<std::string, std::less<>> seen;
  scan(
      text_, [](std::string_view) {},
      [&](std::string_view name) {
        if (!kKnownPlaceholders.contains(name)) {
          fail(ErrorKind::Template, "unknown placeholder {" + std::string(name) + "}");
        }
        seen.emplace(name);
      });
  for (const auto& name : required_for(kind_)) {
    if (!seen.contains(name)) {
      fail(ErrorKind::Template, "template is missing placeholder {" + name + "}");
    }
  }
}

PromptTemplate PromptTemplate::default_topology() {
  return PromptTemplate(
      PromptKind::Topology,
      "Target node: {target_text}\n"
      "\n"
      "Neighboring set:\n"
      "{neighbor_list}\n"
      "\n"
      "Candidate List:\n"
      "{candidate_list}\n"
      "\n"
      "Step 1: Analyze the target node and its neighboring set.\n"
      "Summarize why the nodes in the neighboring set are adjacent to the target node. Be sure "
      "to highlight the most prominent factors that guide their strong correlation.\n"
      "\n"
      "Step 2: From the neighboring set, choose the node that is most relevant to the target "
      "node. Let's break it down step by step to ensure we accurately evaluate the "
      "correlation.\n"
      "\n"
      "Step 3: Based on the inferred prominent factors from Step 1, exclude the node from the "
      "following Candidate List that is least related to the target node and analyze why.\n");
}

PromptTemplate PromptTemplate::default_text() {
  return PromptTemplate(
      PromptKind::Text,
      "Step 1: Given the target node titled {influencer_text}, identify one keyword that "
      "reflects its category.\n"
      "\n"
      "Step 2: Given the paper P1 titled {target_text}, your task is to generate a new paper by "
      "modifying P1 title so that it meets the following requirements:\n"
      "1. It must retain some of the original words from the P1 title.\n"
      "2. It should include the keyword identified in Step 1 and be aligned with the target "
      "node category determined in Step 1.\n");
}

PromptTemplate PromptTemplate::from_file(PromptKind kind, const std::filesystem::path& path) {
  return PromptTemplate(kind, read_file(path));
}

std::string PromptTemplate::render(
    const std::map<std::string, std::string, std::less<>>& values) const {
  std::string out;
  scan(
      text_, [&](std::string_view literal) { out += literal; },
      [&](std::string_view name) {
        const auto it = values.find(name);
        if (it == values.end()) {
          fail(ErrorKind::Template, "no value supplied for {" + std::string(name) + "}");
        }
        out += it->second;
      });
  return out;
}

std::string topology_response_instruction() {
  return "\nRespond with a single JSON object and nothing else, using exactly these keys:\n"
         "{\"rationale\": \"<Step 1 summary and the reasoning for Steps 2 and 3>\", "
         "\"delete_id\": <id of the chosen node from the neighboring set, or null if it is "
         "empty>, \"add_id\": <id of the excluded node from the Candidate List>}\n";
}

std::string text_response_instruction(long long token_budget) {
  return "\nThe new title may differ from the P1 title by at most " +
         std::to_string(token_budget) +
         " words (words removed plus words added).\n"
         "Respond with a single JSON object and nothing else, using exactly these keys:\n"
         "{\"keyword\": \"<the single keyword from Step 1>\", \"new_text\": \"<the new "
         "title>\", \"rationale\": \"<brief justification>\"}\n";
}

}  // namespace tagsiege
