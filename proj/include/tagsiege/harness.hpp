#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagsiege/errors.hpp"
#include "tagsiege/graph.hpp"

namespace tagsiege::harness {

std::string_view tool_version();

/// Flat key=value configuration. Keys use underscores; dashes are accepted on input.
using Config = std::map<std::string, std::string, std::less<>>;

struct OptionSpec {
  std::string key;
  std::string default_value;
  std::string help;
  /// Commands accepting the key.
  std::vector<std::string> commands;
};

const std::vector<OptionSpec>& option_table();
const std::vector<std::string>& command_names();

/// Every key the command accepts, with its built-in default.
Config defaults(std::string_view command);

/// Parses the config-file format: one `key = value` per line, `#` starts a
/// comment, blank lines are ignored. Throws ParseError on malformed lines.
Config parse_config_text(std::string_view text);
Config parse_config_file(const std::filesystem::path& path);
std::string normalize_key(std::string_view key);

/// defaults < file < flags. File keys unknown to every command are rejected;
/// known keys that the command does not take are ignored. Flag keys must
/// belong to the command.
Config resolve(std::string_view command, const Config& file, const Config& flags);

/// FNV-1a over the canonical `key=value\n` rendering, as 16 hex digits.
std::string config_hash(const Config& config);

/// 0 ok, 2 config/validation, 3 backend, 4 training.
int exit_code_for(ErrorKind kind);

/// Target spec: `<split>` (every node of the split), `<split>:N` (seeded
/// sample of N), `list:3,7,9`, or `file:PATH` with one id per line.
/// Sampled targets are returned in ascending order.
std::vector<NodeId> resolve_targets(std::string_view spec, const TextAttributedGraph& graph,
                                    std::uint64_t seed);

struct RunOutcome {
  int exit_code = 0;
  std::string message;
  std::filesystem::path manifest_path;
  /// Empty when the command failed before its output location was known.
  std::string manifest_json;
};

/// Runs `command` with a fully resolved config. Library errors are caught and
/// turned into exit codes; the manifest is written whenever `out` is usable.
RunOutcome run(std::string_view command, const Config& config, std::ostream& log);

/// Re-runs the command recorded in a manifest, with `overrides` applied on top
/// of its recorded config.
RunOutcome replay(const std::filesystem::path& manifest, const Config& overrides,
                  std::ostream& log);

}  // namespace tagsiege::harness
