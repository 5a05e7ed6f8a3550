#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace tagsiege {

enum class PromptKind { Topology, Text };

/// Prompt text with {placeholder} slots. Known placeholders are
/// {target_text}, {neighbor_list}, {candidate_list} and {influencer_text};
/// "{{" and "}}" render as literal braces.
class PromptTemplate {
 public:
  /// Throws Template when a required placeholder is missing or an unknown one appears.
  PromptTemplate(PromptKind kind, std::string text);

  static PromptTemplate default_topology();
  static PromptTemplate default_text();
  static PromptTemplate from_file(PromptKind kind, const std::filesystem::path& path);

  PromptKind kind() const noexcept { return kind_; }
  const std::string& text() const noexcept { return text_; }

  std::string render(const std::map<std::string, std::string, std::less<>>& values) const;

 private:
  PromptKind kind_;
  std::string text_;
};

struct PromptTemplates {
  PromptTemplate topology = PromptTemplate::default_topology();
  PromptTemplate text = PromptTemplate::default_text();
};

/// Appended to every topology prompt; fixes the response keys.
std::string topology_response_instruction();
/// Appended to every text prompt; states the token budget and response keys.
std::string text_response_instruction(long long token_budget);

}  // namespace tagsiege
