#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tagsiege/harness.hpp"

namespace harness = tagsiege::harness;

namespace {

std::string dashed(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

struct CommandFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::vector<std::string> attack_dirs;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

harness::Config collect(CommandFlags& flags) {
  harness::Config out;
  for (auto& [key, opt] : flags.options) {
    if (opt->count() > 0) out[key] = flags.values[key];
  }
  for (const auto& kv : flags.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw tagsiege::Error(tagsiege::ErrorKind::Config, "--set expects KEY=VALUE, got '" + kv + "'");
    }
    out[harness::normalize_key(kv.substr(0, eq))] = kv.substr(eq + 1);
  }
  if (!flags.attack_dirs.empty()) {
    std::string joined;
    for (const auto& d : flags.attack_dirs) joined += (joined.empty() ? "" : ",") + d;
    out["attacks"] = joined;
  }
  return out;
}

int report(const harness::RunOutcome& outcome) {
  if (outcome.exit_code != 0) std::cerr << "tagsiege: " << outcome.message << "\n";
  if (!outcome.manifest_path.empty() && !outcome.manifest_json.empty()) {
    std::cerr << "manifest: " << outcome.manifest_path.string() << "\n";
  }
  return outcome.exit_code;
}

const std::map<std::string, std::string> kSummaries = {
    {"synth", "generate a synthetic text-attributed graph"},
    {"encode", "train the attacker's surrogate encoder and export embeddings"},
    {"retrieve", "list the most dissimilar influencer candidates per target"},
    {"attack", "build and apply a perturbation plan"},
    {"evaluate", "score attack runs against trained victim models"},
    {"audit", "homophily bound audit of a perturbed graph"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box structure and text perturbation of text-attributed graphs"};
  app.set_version_flag("--version", std::string(harness::tool_version()));
  app.require_subcommand(1);

  std::map<std::string, CommandFlags> flags;
  std::map<std::string, CLI::App*> subcommands;
  for (const auto& command : harness::command_names()) {
    CLI::App* sub = app.add_subcommand(command, kSummaries.at(command));
    CommandFlags& f = flags[command];
    sub->add_option("--config", f.config_file, "flat key = value config file")
        ->check(CLI::ExistingFile);
    sub->add_option("--set", f.sets, "override any config key, KEY=VALUE (repeatable)");
    for (const auto& spec : harness::option_table()) {
      if (std::find(spec.commands.begin(), spec.commands.end(), command) == spec.commands.end()) {
        continue;
      }
      std::string help = spec.help;
      if (!spec.default_value.empty()) help += " [default: " + spec.default_value + "]";
      f.options[spec.key] = sub->add_option("--" + dashed(spec.key), f.values[spec.key], help);
    }
    if (command == "evaluate") {
      sub->add_option("--attack", f.attack_dirs, "attack run directory (repeatable)");
    }
    subcommands[command] = sub;
  }

  std::string replay_manifest;
  std::vector<std::string> replay_sets;
  std::string replay_out;
  CLI::App* replay = app.add_subcommand("replay", "re-run a command from its manifest");
  replay->add_option("manifest", replay_manifest, "manifest.json of an earlier run")
      ->required()
      ->check(CLI::ExistingFile);
  replay->add_option("--out", replay_out, "write outputs here instead of the recorded location");
  replay->add_option("--set", replay_sets, "override a recorded config key, KEY=VALUE");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (replay->parsed()) {
      CommandFlags f;
      f.sets = replay_sets;
      harness::Config overrides = collect(f);
      if (!replay_out.empty()) overrides["out"] = replay_out;
      return report(harness::replay(replay_manifest, overrides, std::cerr));
    }
    for (const auto& [command, sub] : subcommands) {
      if (!sub->parsed()) continue;
      CommandFlags& f = flags[command];
      const harness::Config file =
          f.config_file.empty() ? harness::Config{} : harness::parse_config_file(f.config_file);
      const harness::Config resolved = harness::resolve(command, file, collect(f));
      return report(harness::run(command, resolved, std::cerr));
    }
  } catch (const tagsiege::Error& e) {
    std::cerr << "tagsiege: " << e.what() << "\n";
    return harness::exit_code_for(e.kind());
  }
  return 2;
}
