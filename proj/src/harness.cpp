#include "tagsiege/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

#include "tagsiege/attack.hpp"
#include "tagsiege/backend.hpp"
#include "tagsiege/baselines.hpp"
#include "tagsiege/encoder.hpp"
#include "tagsiege/io.hpp"
#include "tagsiege/metrics.hpp"
#include "tagsiege/retrieval.hpp"
#include "tagsiege/rng.hpp"
#include "tagsiege/synth.hpp"
#include "tagsiege/text.hpp"
#include "tagsiege/victims.hpp"

#ifndef TAGSIEGE_VERSION
#define TAGSIEGE_VERSION "0.0.0"
#endif

namespace tagsiege::harness {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view tool_version() { return TAGSIEGE_VERSION; }

namespace {

const std::vector<std::string> kCommands = {"synth",  "encode",   "retrieve",
                                            "attack", "evaluate", "audit"};

std::vector<OptionSpec> build_option_table() {
  const std::vector<std::string> all = kCommands;
  const std::vector<std::string> synth = {"synth"};
  const std::vector<std::string> dataset = {"encode", "retrieve", "attack", "evaluate", "audit"};
  const std::vector<std::string> featurized = {"encode", "retrieve", "attack", "evaluate", "audit"};
  const std::vector<std::string> encoder = {"encode", "retrieve", "attack"};
  const std::vector<std::string> targeted = {"retrieve", "attack"};
  const std::vector<std::string> attack = {"attack"};
  const std::vector<std::string> evaluate = {"evaluate"};
  return {
      {"out", "", "output path (dataset directory for synth, run directory otherwise)", all},
      {"seed", "0", "run seed; every random choice derives from it", all},

      {"nodes", "300", "number of nodes", synth},
      {"classes", "4", "number of classes", synth},
      {"p_in", "0.05", "intra-class edge probability", synth},
      {"p_out", "0.005", "inter-class edge probability", synth},
      {"tokens_per_text", "8", "tokens per node text", synth},
      {"class_vocab", "150", "words per class vocabulary", synth},
      {"shared_vocab", "60", "words in the shared vocabulary", synth},
      {"noise_rate", "0.3", "probability a token comes from the shared vocabulary", synth},
      {"train_fraction", "0.6", "train split fraction", synth},
      {"val_fraction", "0.2", "validation split fraction", synth},
      {"test_fraction", "0.2", "test split fraction", synth},

      {"dataset", "", "clean dataset directory", dataset},
      {"vocab_size", "5000", "maximum TF-IDF vocabulary size", featurized},
      {"embeddings", "", "optional JSONL node embeddings used as attacker features", encoder},

      {"encoder", "", "encoder checkpoint to load instead of training", {"retrieve", "attack"}},
      {"encoder_hidden", "64", "encoder hidden width (embedding dimension)", encoder},
      {"encoder_lr", "0.01", "encoder learning rate", encoder},
      {"encoder_epochs", "200", "maximum encoder epochs", encoder},
      {"encoder_weight_decay", "0.0005", "encoder L2 weight decay", encoder},

      {"targets", "test:30", "target spec: SPLIT, SPLIT:N, list:IDS or file:PATH", targeted},
      {"influencers", "5", "influencer candidates retrieved per target", targeted},

      {"attacker", "badgraph", "badgraph, rnd or flip", attack},
      {"backend", "oracle", "oracle or llm", attack},
      {"anchor", "aligned", "aligned or misaligned (ablation)", attack},
      {"edge_budget", "2", "structural edits per target", attack},
      {"global_edge_budget", "unlimited", "structural edits over the run", attack},
      {"text_budget", "8", "token edits per target text", attack},
      {"global_text_budget", "unlimited", "token edits over the run", attack},
      {"topology_template", "", "file overriding the topology prompt", attack},
      {"text_template", "", "file overriding the text prompt", attack},
      {"allow_partial", "false", "write the perturbed graph even when targets failed", attack},
      {"llm_base_url", "", "chat-completion endpoint (else TAGSIEGE_BASE_URL, else default)", attack},
      {"llm_model", "deepseek-chat", "model name", attack},
      {"llm_temperature", "0", "sampling temperature", attack},
      {"llm_timeout", "60", "request timeout in seconds", attack},
      {"llm_max_attempts", "3", "attempts per request", attack},
      {"llm_backoff", "1", "initial retry backoff in seconds", attack},
      {"trace", "", "file receiving LLM request/response traces (token redacted)", attack},
      {"price_in", "0.27", "USD per million prompt tokens", attack},
      {"price_out", "1.10", "USD per million completion tokens", attack},

      {"attacks", "", "comma-separated attack run directories", evaluate},
      {"victims", "gcn,sgc,sage", "comma-separated victim models", evaluate},
      {"victim_hidden", "64", "victim hidden width", evaluate},
      {"victim_lr", "0.01", "victim learning rate", evaluate},
      {"victim_epochs", "200", "maximum victim epochs", evaluate},
      {"victim_weight_decay", "0.0005", "victim L2 weight decay", evaluate},
      {"sgc_hops", "2", "SGC propagation steps", evaluate},
      {"degree_buckets", "", "ascending degree boundaries for per-bucket accuracy", evaluate},

      {"perturbed", "", "perturbed dataset directory", {"audit"}},
  };
}

bool takes(const OptionSpec& spec, std::string_view command) {
  return std::find(spec.commands.begin(), spec.commands.end(), command) != spec.commands.end();
}

const OptionSpec* find_option(std::string_view key) {
  for (const auto& spec : option_table()) {
    if (spec.key == key) return &spec;
  }
  return nullptr;
}

void expect_command(std::string_view command) {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
    fail(ErrorKind::Config, "unknown command '" + std::string(command) + "'");
  }
}

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_list(std::string_view text, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(sep, start), text.size());
    std::string item = trim(text.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

/// Typed, validated views of config values.
class Settings {
 public:
  explicit Settings(const Config& config) : config_(config) {}

  const std::string& str(std::string_view key) const {
    const auto it = config_.find(key);
    if (it == config_.end()) fail(ErrorKind::Config, "missing config key '" + std::string(key) + "'");
    return it->second;
  }

  const std::string& required(std::string_view key) const {
    const auto& value = str(key);
    if (value.empty()) fail(ErrorKind::Config, "'" + std::string(key) + "' must be set");
    return value;
  }

  std::int64_t integer(std::string_view key) const {
    const auto& value = str(key);
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) bad(key, "an integer");
    return out;
  }

  std::size_t count(std::string_view key) const {
    const auto v = integer(key);
    if (v < 0) bad(key, "a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  std::uint64_t seed() const {
    const auto& value = str("seed");
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) bad("seed", "an unsigned integer");
    return out;
  }

  double real(std::string_view key) const {
    const auto& value = str(key);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) bad(key, "a number");
    return out;
  }

  bool flag(std::string_view key) const {
    const auto& value = str(key);
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    bad(key, "true or false");
  }

  std::int64_t budget(std::string_view key) const {
    if (str(key) == "unlimited") return kUnlimited;
    return integer(key);
  }

 private:
  [[noreturn]] void bad(std::string_view key, std::string_view what) const {
    fail(ErrorKind::Config, "'" + std::string(key) + "' must be " + std::string(what) + ", got '" +
                                str(key) + "'");
  }

  const Config& config_;
};

json config_to_json(const Config& config) {
  json out = json::object();
  for (const auto& [k, v] : config) out[k] = v;
  return out;
}

struct Timings {
  using Clock = std::chrono::steady_clock;
  json values = json::object();

  template <typename F>
  auto time(const std::string& name, F&& f) {
    const auto start = Clock::now();
    if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
      f();
      values[name] = std::chrono::duration<double>(Clock::now() - start).count();
    } else {
      auto result = f();
      values[name] = std::chrono::duration<double>(Clock::now() - start).count();
      return result;
    }
  }
};

/// State shared by one command invocation.
struct Run {
  std::string command;
  const Config& config;
  Settings settings;
  std::ostream& log;
  json manifest = json::object();
  std::vector<std::string> outputs;
  Timings timings;
  int exit_code = 0;
  std::string message;

  Run(std::string_view cmd, const Config& cfg, std::ostream& out)
      : command(cmd), config(cfg), settings(cfg), log(out) {}

  fs::path out_dir() const { return fs::path(settings.required("out")); }

  void wrote(const fs::path& path) { outputs.push_back(path.string()); }
};

fs::path manifest_location(std::string_view command, const std::string& out) {
  if (out.empty()) return {};
  fs::path p = fs::path(out).lexically_normal();
  if (p.filename().empty()) p = p.parent_path();
  if (command == "synth") return fs::path(p.string() + ".manifest.json");
  return p / "manifest.json";
}

struct Dataset {
  TextAttributedGraph graph;
  Vocabulary vocab;
  FeatureMatrix features;
};

Dataset load_dataset(Run& run) {
  auto graph = run.timings.time("load", [&] { return load_graph(run.settings.required("dataset")); });
  Vocabulary vocab = build_vocabulary(graph, run.settings.count("vocab_size"));
  FeatureMatrix features = featurize(graph.texts(), vocab);
  run.manifest["dataset"] = {{"nodes", graph.node_count()},
                             {"edges", graph.edge_count()},
                             {"classes", graph.class_count()},
                             {"vocabulary", vocab.size()}};
  return {std::move(graph), std::move(vocab), std::move(features)};
}

/// Features the attacker's encoder sees: an embeddings file when given, TF-IDF otherwise.
FeatureMatrix attacker_features(Run& run, const Dataset& data) {
  const auto& path = run.settings.str("embeddings");
  if (path.empty()) return data.features;
  return load_embeddings(path, data.graph.node_count());
}

EncoderConfig encoder_config(const Settings& s) {
  EncoderConfig c;
  c.hidden = s.count("encoder_hidden");
  c.lr = s.real("encoder_lr");
  c.epochs = s.count("encoder_epochs");
  c.weight_decay = s.real("encoder_weight_decay");
  c.seed = s.seed();
  return c;
}

EncoderParams obtain_encoder(Run& run, const Dataset& data, const FeatureMatrix& x) {
  const auto checkpoint =
      run.config.contains("encoder") ? run.settings.str("encoder") : std::string();
  if (!checkpoint.empty()) return load_encoder(checkpoint);
  nn::TrainingTrace trace;
  auto params = run.timings.time(
      "encoder_training", [&] { return train_encoder(data.graph, x, encoder_config(run.settings), &trace); });
  run.manifest["encoder_training"] = {{"epochs", trace.losses.size()},
                                      {"early_stopped", trace.early_stopped},
                                      {"final_loss", trace.losses.empty() ? 0.0 : trace.losses.back()}};
  return params;
}

Budgets budgets_from(const Settings& s) {
  Budgets b;
  b.per_node_edge_budget = s.budget("edge_budget");
  b.global_edge_budget = s.budget("global_edge_budget");
  b.text_token_budget = s.budget("text_budget");
  b.global_text_budget = s.budget("global_text_budget");
  b.validate();
  return b;
}

json skipped_to_json(const std::vector<SkippedTarget>& skipped) {
  json out = json::array();
  for (const auto& s : skipped) out.push_back({{"target", s.target}, {"reason", s.reason}});
  return out;
}

// ---------------------------------------------------------------- commands

void cmd_synth(Run& run) {
  const Settings& s = run.settings;
  SynthConfig sc;
  sc.node_count = s.count("nodes");
  sc.class_count = static_cast<int>(s.integer("classes"));
  sc.p_in = s.real("p_in");
  sc.p_out = s.real("p_out");
  sc.tokens_per_text = s.count("tokens_per_text");
  sc.class_vocab_size = s.count("class_vocab");
  sc.shared_vocab_size = s.count("shared_vocab");
  sc.noise_rate = s.real("noise_rate");
  sc.train_fraction = s.real("train_fraction");
  sc.val_fraction = s.real("val_fraction");
  sc.test_fraction = s.real("test_fraction");
  sc.seed = s.seed();
  const auto graph = run.timings.time("generate", [&] { return generate(sc); });
  const fs::path out = run.out_dir();
  run.timings.time("save", [&] { save_graph(graph, out); });
  run.wrote(out / kNodeFile);
  run.wrote(out / kEdgeFile);

  std::size_t isolated = 0;
  for (NodeId v = 0; v < graph.node_count(); ++v) isolated += graph.degree(v) == 0 ? 1 : 0;
  const double isolated_fraction =
      static_cast<double>(isolated) / static_cast<double>(graph.node_count());
  run.manifest["dataset"] = {{"nodes", graph.node_count()},
                             {"edges", graph.edge_count()},
                             {"classes", graph.class_count()},
                             {"isolated_nodes", isolated},
                             {"isolated_fraction", isolated_fraction}};
  run.log << "synth: " << graph.node_count() << " nodes, " << graph.edge_count() << " edges, "
          << isolated << " isolated\n";
}

void cmd_encode(Run& run) {
  const Dataset data = load_dataset(run);
  const FeatureMatrix x = attacker_features(run, data);
  const EncoderParams params = obtain_encoder(run, data, x);
  const EncoderOutput out = forward(params, normalize_adjacency(data.graph), x);

  const auto predictions = nn::argmax_rows(out.logits);
  const auto train = data.graph.nodes_in(Split::Train);
  std::size_t correct = 0;
  for (NodeId v : train) correct += predictions[v] == data.graph.label(v) ? 1 : 0;
  run.manifest["encoder_training"]["train_accuracy"] =
      train.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(train.size());

  const fs::path dir = run.out_dir();
  fs::create_directories(dir);
  save_encoder(params, dir / "encoder.json");
  save_embeddings(dir / "embeddings.jsonl", out.embeddings);
  run.wrote(dir / "encoder.json");
  run.wrote(dir / "embeddings.jsonl");
}

Eigen::MatrixXd attacker_embeddings(Run& run, const Dataset& data) {
  const FeatureMatrix x = attacker_features(run, data);
  const EncoderParams params = obtain_encoder(run, data, x);
  return forward(params, normalize_adjacency(data.graph), x).embeddings;
}

void cmd_retrieve(Run& run) {
  const Dataset data = load_dataset(run);
  const auto targets = resolve_targets(run.settings.str("targets"), data.graph, run.settings.seed());
  const Eigen::MatrixXd z = attacker_embeddings(run, data);
  const auto sets = run.timings.time(
      "retrieval", [&] { return retrieve_all(z, targets, run.settings.count("influencers")); });
  const fs::path dir = run.out_dir();
  fs::create_directories(dir);
  save_influencers(sets, dir / "influencers.jsonl");
  run.wrote(dir / "influencers.jsonl");
  run.manifest["targets"] = targets;
}

std::unique_ptr<LlmBackend> make_llm_backend(Run& run, std::unique_ptr<std::ofstream>& trace) {
  const Settings& s = run.settings;
  LlmConfig c;
  c.base_url = s.str("llm_base_url");
  if (c.base_url.empty()) {
    if (const char* env = std::getenv("TAGSIEGE_BASE_URL"); env && *env) c.base_url = env;
  }
  if (c.base_url.empty()) c.base_url = LlmConfig{}.base_url;
  c.model = s.str("llm_model");
  c.temperature = s.real("llm_temperature");
  c.timeout_seconds = s.real("llm_timeout");
  c.max_attempts = static_cast<int>(s.integer("llm_max_attempts"));
  c.backoff_seconds = s.real("llm_backoff");
  if (const char* key = std::getenv("TAGSIEGE_API_KEY"); key) c.api_key = key;
  if (!s.str("trace").empty()) {
    trace = std::make_unique<std::ofstream>(s.str("trace"));
    if (!*trace) fail(ErrorKind::Config, "cannot open trace file " + s.str("trace"));
    c.trace = trace.get();
  }
  run.manifest["llm_endpoint"] = c.base_url;
  return std::make_unique<LlmBackend>(std::move(c));
}

AttackConfig attack_config(const Settings& s, const Budgets& budgets) {
  AttackConfig c;
  c.influencer_count = s.count("influencers");
  c.budgets = budgets;
  c.seed = s.seed();
  const auto& anchor = s.str("anchor");
  if (anchor == "aligned") {
    c.anchor = AnchorMode::Aligned;
  } else if (anchor == "misaligned") {
    c.anchor = AnchorMode::Misaligned;
  } else {
    fail(ErrorKind::Config, "anchor must be aligned or misaligned, got '" + anchor + "'");
  }
  if (!s.str("topology_template").empty()) {
    c.templates.topology = PromptTemplate::from_file(PromptKind::Topology, s.str("topology_template"));
  }
  if (!s.str("text_template").empty()) {
    c.templates.text = PromptTemplate::from_file(PromptKind::Text, s.str("text_template"));
  }
  return c;
}

void cmd_attack(Run& run) {
  const Settings& s = run.settings;
  const Dataset data = load_dataset(run);
  const auto targets = resolve_targets(s.str("targets"), data.graph, s.seed());
  const Budgets budgets = budgets_from(s);
  const auto& attacker = s.str("attacker");
  const auto& backend_name = s.str("backend");
  const fs::path dir = run.out_dir();
  run.manifest["targets"] = targets;

  PerturbationPlan plan;
  AttackStats stats;
  std::optional<LlmUsage> usage;
  if (attacker == "badgraph") {
    if (backend_name != "oracle" && backend_name != "llm") {
      fail(ErrorKind::Config, "backend must be oracle or llm, got '" + backend_name + "'");
    }
    const AttackConfig config = attack_config(s, budgets);
    run.manifest["backend_kind"] = backend_name;
    const Eigen::MatrixXd z = attacker_embeddings(run, data);
    std::unique_ptr<std::ofstream> trace;
    std::unique_ptr<AttackerBackend> backend;
    LlmBackend* llm = nullptr;
    if (backend_name == "llm") {
      auto b = make_llm_backend(run, trace);
      llm = b.get();
      backend = std::move(b);
    } else {
      backend = std::make_unique<OracleBackend>(data.graph, z, data.vocab);
    }
    AttackResult result;
    try {
      result = run.timings.time(
          "attack", [&] { return attack(data.graph, targets, z, *backend, data.vocab, config); });
    } catch (const Error&) {
      if (llm) usage = llm->usage();
      if (usage) {
        run.manifest["llm_usage"] = {{"requests", usage->requests},
                                     {"failed_attempts", usage->failed_attempts}};
      }
      throw;
    }
    plan = std::move(result.plan);
    stats = result.stats;
    if (llm) usage = llm->usage();
  } else if (attacker == "rnd" || attacker == "flip") {
    run.manifest["backend_kind"] = "none";
    plan = run.timings.time("attack", [&] {
      return attacker == "rnd" ? rnd_attack(data.graph, targets, budgets, s.seed())
                               : flip_attack(data.graph, targets, budgets);
    });
    stats.completed = plan.entries.size();
  } else {
    fail(ErrorKind::Config, "attacker must be badgraph, rnd or flip, got '" + attacker + "'");
  }

  fs::create_directories(dir);
  save_plan(plan, dir / "plan.jsonl");
  run.wrote(dir / "plan.jsonl");

  const bool partial = stats.backend_failures > 0;
  if (!partial || s.flag("allow_partial")) {
    const PerturbedGraph perturbed =
        run.timings.time("apply", [&] { return apply_plan(data.graph, plan, budgets); });
    save_graph(perturbed.graph, dir / "perturbed");
    run.wrote(dir / "perturbed" / kNodeFile);
    run.wrote(dir / "perturbed" / kEdgeFile);
    const EditCounts counts = edit_counts(data.graph, perturbed.graph);
    run.manifest["edits"] = {{"edge_edits", counts.edge_edits},
                             {"text_edits", counts.text_edits},
                             {"text_token_edits", perturbed.audit.text_token_edits},
                             {"edge_ratio", counts.edge_ratio}};
  }

  run.manifest["query_count"] = stats.queries;
  run.manifest["retry_count"] = stats.retries;
  run.manifest["abandoned_queries"] = stats.abandoned_queries;
  run.manifest["completed"] = stats.completed;
  run.manifest["fallbacks"] = stats.fallbacks;
  run.manifest["noop_anchors"] = stats.noop_anchors;
  run.manifest["backend_failures"] = stats.backend_failures;
  run.manifest["skipped"] = skipped_to_json(plan.skipped);
  if (usage) {
    const double cost = (static_cast<double>(usage->prompt_tokens) * s.real("price_in") +
                         static_cast<double>(usage->completion_tokens) * s.real("price_out")) /
                        1e6;
    run.manifest["llm_usage"] = {{"requests", usage->requests},
                                 {"failed_attempts", usage->failed_attempts},
                                 {"prompt_tokens", usage->prompt_tokens},
                                 {"completion_tokens", usage->completion_tokens},
                                 {"cost_usd", cost}};
    run.manifest["cost_per_node"] =
        stats.completed == 0 ? 0.0 : cost / static_cast<double>(stats.completed);
  }
  if (attacker == "badgraph" && stats.queries != 2 * stats.completed) {
    fail(ErrorKind::Backend, "query count is not two per completed target");
  }
  run.log << "attack: " << stats.completed << " of " << targets.size() << " targets perturbed, "
          << stats.queries << " queries\n";
  if (partial) {
    run.exit_code = exit_code_for(ErrorKind::Backend);
    run.message = std::to_string(stats.backend_failures) + " target(s) failed at the backend" +
                  (s.flag("allow_partial") ? "" : "; perturbed graph not written (allow_partial=false)");
  }
}

struct AttackRun {
  std::string name;
  fs::path dir;
  json manifest;
  PerturbationPlan plan;
  std::vector<NodeId> targets;
  Budgets budgets;
};

AttackRun load_attack_run(const fs::path& dir) {
  AttackRun a;
  a.dir = dir;
  try {
    a.manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, (dir / "manifest.json").string() + ": " + e.what());
  }
  if (a.manifest.value("command", "") != "attack") {
    fail(ErrorKind::Config, dir.string() + " is not an attack run");
  }
  if (!fs::exists(dir / "perturbed" / kNodeFile)) {
    fail(ErrorKind::Config, dir.string() + " has no perturbed graph");
  }
  Config cfg;
  for (const auto& [k, v] : a.manifest.at("config").items()) cfg[k] = v.get<std::string>();
  const Settings s(cfg);
  a.name = s.str("attacker");
  if (a.name == "badgraph" && s.str("anchor") == "misaligned") a.name += "-misaligned";
  a.budgets = budgets_from(s);
  a.targets = a.manifest.at("targets").get<std::vector<NodeId>>();
  a.plan = load_plan(dir / "plan.jsonl");
  return a;
}

std::vector<std::size_t> parse_buckets(const std::string& spec) {
  std::vector<std::size_t> bounds;
  for (const auto& item : split_list(spec)) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      fail(ErrorKind::Config, "degree_buckets must be integers, got '" + item + "'");
    }
    if (!bounds.empty() && v <= bounds.back()) {
      fail(ErrorKind::Config, "degree_buckets must be strictly ascending");
    }
    bounds.push_back(v);
  }
  return bounds;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void cmd_evaluate(Run& run) {
  const Settings& s = run.settings;
  const Dataset data = load_dataset(run);
  const auto attack_dirs = split_list(s.required("attacks"));
  const auto bucket_bounds = parse_buckets(s.str("degree_buckets"));

  VictimConfig vc;
  vc.hidden = s.count("victim_hidden");
  vc.lr = s.real("victim_lr");
  vc.epochs = s.count("victim_epochs");
  vc.weight_decay = s.real("victim_weight_decay");
  vc.sgc_hops = static_cast<int>(s.integer("sgc_hops"));
  vc.seed = s.seed();

  std::vector<VictimModel> victims;
  json victim_rows = json::array();
  const auto test_nodes = data.graph.nodes_in(Split::Test);
  for (const auto& name : split_list(s.required("victims"))) {
    const VictimKind kind = parse_victim_kind(name);
    try {
      victims.push_back(run.timings.time("train_" + std::string(to_string(kind)), [&] {
        return train_victim(kind, data.graph, data.features, vc);
      }));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Training) throw;
      fail(ErrorKind::Training,
           "victim '" + std::string(to_string(kind)) + "' failed to train: " + e.what());
    }
    json row = {{"victim", to_string(kind)}};
    row["validation_accuracy"] = victims.back().validation_accuracy();
    if (!test_nodes.empty()) {
      row["test_accuracy"] = accuracy(victims.back(), data.graph, data.features, test_nodes);
    }
    victim_rows.push_back(row);
  }
  if (victims.empty()) fail(ErrorKind::Config, "no victims configured");

  json report = json::object();
  report["victims"] = victim_rows;
  report["attacks"] = json::array();
  std::string csv = "attacker,victim,clean_accuracy,perturbed_accuracy,drop";
  for (std::size_t b = 0; b <= bucket_bounds.size() && !bucket_bounds.empty(); ++b) {
    const std::string lo = b == 0 ? "0" : std::to_string(bucket_bounds[b - 1]);
    const std::string hi = b < bucket_bounds.size() ? std::to_string(bucket_bounds[b] - 1) : "inf";
    csv += ",perturbed_accuracy_deg_" + lo + "_" + hi;
  }
  csv += "\n";

  for (const auto& dir_name : attack_dirs) {
    const AttackRun a = load_attack_run(dir_name);
    const TextAttributedGraph perturbed = load_graph(a.dir / "perturbed", data.graph.class_count());
    if (perturbed.node_count() != data.graph.node_count()) {
      fail(ErrorKind::Validation, a.dir.string() + " does not match the clean dataset");
    }
    if (a.targets.empty()) fail(ErrorKind::Config, a.dir.string() + " has no targets");
    const FeatureMatrix perturbed_features = featurize(perturbed.texts(), data.vocab);

    json entry = {{"attacker", a.name}, {"run", a.dir.string()}, {"targets", a.targets.size()}};
    entry["completed"] = a.manifest.value("completed", 0);
    entry["query_count"] = a.manifest.value("query_count", 0);

    // Degree buckets by clean degree.
    std::vector<std::vector<NodeId>> buckets(bucket_bounds.empty() ? 0 : bucket_bounds.size() + 1);
    for (NodeId t : a.targets) {
      if (buckets.empty()) break;
      const std::size_t d = data.graph.degree(t);
      const auto b = static_cast<std::size_t>(
          std::upper_bound(bucket_bounds.begin(), bucket_bounds.end(), d) - bucket_bounds.begin());
      buckets[b].push_back(t);
    }

    json rows = json::array();
    std::vector<double> clean_acc;
    std::vector<double> perturbed_acc;
    for (const VictimModel& v : victims) {
      const double clean = accuracy(v, data.graph, data.features, a.targets);
      const double pert = accuracy(v, perturbed, perturbed_features, a.targets);
      clean_acc.push_back(clean);
      perturbed_acc.push_back(pert);
      json row = {{"victim", to_string(v.kind())},
                  {"clean_accuracy", clean},
                  {"perturbed_accuracy", pert},
                  {"drop", clean - pert}};
      csv += a.name + "," + std::string(to_string(v.kind())) + "," + fixed(clean) + "," +
             fixed(pert) + "," + fixed(clean - pert);
      if (!buckets.empty()) {
        json per_bucket = json::array();
        for (std::size_t b = 0; b < buckets.size(); ++b) {
          json cell = {{"min_degree", b == 0 ? 0 : bucket_bounds[b - 1]}, {"count", buckets[b].size()}};
          if (b < bucket_bounds.size()) cell["max_degree"] = bucket_bounds[b] - 1;
          if (buckets[b].empty()) {
            csv += ",";
          } else {
            const double acc = accuracy(v, perturbed, perturbed_features, buckets[b]);
            cell["clean_accuracy"] = accuracy(v, data.graph, data.features, buckets[b]);
            cell["perturbed_accuracy"] = acc;
            csv += "," + fixed(acc);
          }
          per_bucket.push_back(cell);
        }
        row["degree_buckets"] = per_bucket;
      }
      csv += "\n";
      rows.push_back(row);
    }
    entry["rows"] = rows;

    const auto aggregates_json = [](const Aggregates& g) {
      json out = {{"average", g.average}, {"weighted", g.weighted}};
      if (g.three_max) out["three_max"] = *g.three_max;
      return out;
    };
    entry["aggregates"] = {{"clean", aggregates_json(aggregate(clean_acc))},
                           {"perturbed", aggregates_json(aggregate(perturbed_acc))}};

    const BoundAudit audit =
        run.timings.time("audit", [&] {
          return bound_audit(data.graph, perturbed, data.features, perturbed_features, data.vocab);
        });
    json audit_json = {{"homophily_edge_clean", audit.homophily_edge_clean},
                       {"homophily_edge_perturbed", audit.homophily_edge_perturbed},
                       {"delta_homophily_edge", audit.delta_homophily_edge},
                       {"homophily_node_clean", audit.homophily_node_clean},
                       {"homophily_node_perturbed", audit.homophily_node_perturbed},
                       {"delta_homophily_node", audit.delta_homophily_node},
                       {"edge_edits", audit.edge_edits},
                       {"edge_ratio", audit.edge_ratio},
                       {"text_nodes_changed", audit.text_nodes_changed},
                       {"tau_max", audit.tau_max},
                       {"tau_mean", audit.tau_mean},
                       {"ratio_edge", audit.ratio_edge},
                       {"ratio_node", audit.ratio_node}};
    if (audit.lipschitz_estimate) audit_json["lipschitz_estimate"] = *audit.lipschitz_estimate;
    entry["audit"] = audit_json;

    const SynergyResult synergy = run.timings.time("synergy", [&] {
      return synergy_test(data.graph, a.plan, a.budgets, victims, data.vocab, a.targets);
    });
    json synergy_rows = json::array();
    for (const auto& r : synergy.rows) {
      synergy_rows.push_back({{"victim", to_string(r.victim)},
                              {"drop_struct", r.drop_struct},
                              {"drop_text", r.drop_text},
                              {"drop_joint", r.drop_joint},
                              {"hard", r.hard},
                              {"soft", r.soft}});
    }
    entry["synergy"] = {{"rows", synergy_rows},
                        {"hard_all", synergy.hard_all},
                        {"soft_count", synergy.soft_count}};
    report["attacks"].push_back(entry);
  }

  const fs::path dir = run.out_dir();
  fs::create_directories(dir);
  write_file(dir / "report.json", report.dump(2) + "\n");
  write_file(dir / "summary.csv", csv);
  run.wrote(dir / "report.json");
  run.wrote(dir / "summary.csv");
}

void cmd_audit(Run& run) {
  const Dataset data = load_dataset(run);
  const TextAttributedGraph perturbed =
      load_graph(run.settings.required("perturbed"), data.graph.class_count());
  if (perturbed.node_count() != data.graph.node_count()) {
    fail(ErrorKind::Validation, "clean and perturbed graphs differ in node count");
  }
  const FeatureMatrix perturbed_features = featurize(perturbed.texts(), data.vocab);
  const BoundAudit a =
      bound_audit(data.graph, perturbed, data.features, perturbed_features, data.vocab);
  json doc = {{"perturb_ratio", a.edge_ratio},
              {"edge_edits", a.edge_edits},
              {"text_nodes_changed", a.text_nodes_changed},
              {"homophily_edge", {{"clean", a.homophily_edge_clean},
                                  {"perturbed", a.homophily_edge_perturbed},
                                  {"delta", a.delta_homophily_edge}}},
              {"homophily_node", {{"clean", a.homophily_node_clean},
                                  {"perturbed", a.homophily_node_perturbed},
                                  {"delta", a.delta_homophily_node}}},
              {"tau_max", a.tau_max},
              {"tau_mean", a.tau_mean},
              {"ratio_edge", a.ratio_edge},
              {"ratio_node", a.ratio_node}};
  if (a.lipschitz_estimate) doc["lipschitz_estimate"] = *a.lipschitz_estimate;
  const fs::path dir = run.out_dir();
  fs::create_directories(dir);
  write_file(dir / "audit.json", doc.dump(2) + "\n");
  run.wrote(dir / "audit.json");
}

}  // namespace

const std::vector<OptionSpec>& option_table() {
  static const std::vector<OptionSpec> table = build_option_table();
  return table;
}

const std::vector<std::string>& command_names() { return kCommands; }

std::string normalize_key(std::string_view key) {
  std::string out(trim(key));
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

Config defaults(std::string_view command) {
  expect_command(command);
  Config out;
  for (const auto& spec : option_table()) {
    if (takes(spec, command)) out[spec.key] = spec.default_value;
  }
  return out;
}

Config parse_config_text(std::string_view text) {
  Config out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    ++line_no;
    const auto end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const std::string key = normalize_key(line.substr(0, eq));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (out.contains(key)) throw ParseError(line_no, "duplicate key '" + key + "'");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

Config parse_config_file(const fs::path& path) { return parse_config_text(read_file(path)); }

Config resolve(std::string_view command, const Config& file, const Config& flags) {
  Config out = defaults(command);
  for (const auto& [raw, value] : file) {
    const std::string key = normalize_key(raw);
    const OptionSpec* spec = find_option(key);
    if (!spec) fail(ErrorKind::Config, "unknown config key '" + key + "'");
    if (takes(*spec, command)) out[key] = value;
  }
  for (const auto& [raw, value] : flags) {
    const std::string key = normalize_key(raw);
    const OptionSpec* spec = find_option(key);
    if (!spec || !takes(*spec, command)) {
      fail(ErrorKind::Config, "'" + key + "' is not an option of " + std::string(command));
    }
    out[key] = value;
  }
  return out;
}

std::string config_hash(const Config& config) {
  std::string canonical;
  for (const auto& [k, v] : config) canonical += k + "=" + v + "\n";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical)));
  return buf;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Backend:
    case ErrorKind::ResponseFormat:
    case ErrorKind::RetrievalExhausted:
      return 3;
    case ErrorKind::Training:
      return 4;
    default:
      return 2;
  }
}

std::vector<NodeId> resolve_targets(std::string_view spec, const TextAttributedGraph& graph,
                                    std::uint64_t seed) {
  const auto colon = spec.find(':');
  const std::string head(spec.substr(0, colon));
  const std::string tail = colon == std::string_view::npos ? "" : std::string(spec.substr(colon + 1));
  std::vector<NodeId> out;
  const auto parse_id = [&](const std::string& item) {
    NodeId v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      fail(ErrorKind::Config, "bad node id '" + item + "' in target spec");
    }
    if (v >= graph.node_count()) {
      fail(ErrorKind::Index, "target " + item + " outside [0, " + std::to_string(graph.node_count()) + ")");
    }
    return v;
  };

  if (head == "list") {
    for (const auto& item : split_list(tail)) out.push_back(parse_id(item));
  } else if (head == "file") {
    std::istringstream in(read_file(tail));
    std::string line;
    while (std::getline(in, line)) {
      const std::string item = trim(line);
      if (!item.empty() && item[0] != '#') out.push_back(parse_id(item));
    }
  } else if (head == "train" || head == "val" || head == "test") {
    std::vector<NodeId> pool = graph.nodes_in(parse_split(head));
    if (!tail.empty()) {
      std::size_t n = 0;
      const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), n);
      if (ec != std::errc() || ptr != tail.data() + tail.size()) {
        fail(ErrorKind::Config, "bad target count '" + tail + "'");
      }
      if (n > pool.size()) {
        fail(ErrorKind::Config, "asked for " + tail + " targets but the " + head + " split has " +
                                    std::to_string(pool.size()) + " nodes");
      }
      auto rng = substream(seed, "harness/targets");
      for (std::size_t i = 0; i < n; ++i) {
        std::swap(pool[i], pool[i + uniform_index(rng, pool.size() - i)]);
      }
      pool.resize(n);
      std::sort(pool.begin(), pool.end());
    }
    out = std::move(pool);
  } else {
    fail(ErrorKind::Config, "unknown target spec '" + std::string(spec) + "'");
  }
  std::set<NodeId> seen;
  for (NodeId v : out) {
    if (!seen.insert(v).second) fail(ErrorKind::Config, "duplicate target " + std::to_string(v));
  }
  if (out.empty()) fail(ErrorKind::Config, "target spec selects no nodes");
  return out;
}

RunOutcome run(std::string_view command, const Config& config, std::ostream& log) {
  Run r(command, config, log);
  RunOutcome outcome;
  const auto out_it = config.find("out");
  outcome.manifest_path = manifest_location(command, out_it == config.end() ? "" : out_it->second);

  const auto started = Timings::Clock::now();
  try {
    expect_command(command);
    if (config != resolve(command, {}, config)) {
      fail(ErrorKind::Config, "config is missing keys; resolve it first");
    }
    r.settings.required("out");
    if (command == "synth") {
      cmd_synth(r);
    } else if (command == "encode") {
      cmd_encode(r);
    } else if (command == "retrieve") {
      cmd_retrieve(r);
    } else if (command == "attack") {
      cmd_attack(r);
    } else if (command == "evaluate") {
      cmd_evaluate(r);
    } else {
      cmd_audit(r);
    }
  } catch (const Error& e) {
    r.exit_code = exit_code_for(e.kind());
    r.message = std::string(to_string(e.kind())) + ": " + e.what();
  } catch (const std::exception& e) {
    r.exit_code = 2;
    r.message = e.what();
  }

  outcome.exit_code = r.exit_code;
  outcome.message = r.message;
  if (outcome.manifest_path.empty()) return outcome;

  json& m = r.manifest;
  m["command"] = std::string(command);
  m["tool_version"] = std::string(tool_version());
  m["config"] = config_to_json(config);
  m["config_hash"] = config_hash(config);
  m["seed"] = r.settings.str("seed");
  m["outputs"] = r.outputs;
  m["exit_code"] = r.exit_code;
  if (!r.message.empty()) m["error"] = r.message;
  r.timings.values["total"] =
      std::chrono::duration<double>(Timings::Clock::now() - started).count();
  m["timings"] = r.timings.values;
  outcome.manifest_json = m.dump(2) + "\n";
  try {
    if (!outcome.manifest_path.parent_path().empty()) {
      fs::create_directories(outcome.manifest_path.parent_path());
    }
    write_file(outcome.manifest_path, outcome.manifest_json);
  } catch (const std::exception& e) {
    if (outcome.exit_code == 0) {
      outcome.exit_code = 2;
      outcome.message = std::string("cannot write manifest: ") + e.what();
    }
  }
  return outcome;
}

RunOutcome replay(const fs::path& manifest, const Config& overrides, std::ostream& log) {
  json doc;
  try {
    doc = json::parse(read_file(manifest));
  } catch (const std::exception& e) {
    RunOutcome out;
    out.exit_code = 2;
    out.message = manifest.string() + ": " + e.what();
    return out;
  }
  const std::string command = doc.value("command", "");
  Config recorded;
  if (doc.contains("config") && doc["config"].is_object()) {
    for (const auto& [k, v] : doc["config"].items()) {
      if (v.is_string()) recorded[k] = v.get<std::string>();
    }
  }
  try {
    const Config resolved = resolve(command, recorded, overrides);
    return run(command, resolved, log);
  } catch (const Error& e) {
    RunOutcome out;
    out.exit_code = exit_code_for(e.kind());
    out.message = e.what();
    return out;
  }
}

}  // namespace tagsiege::harness
