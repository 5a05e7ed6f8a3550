#include "tagsiege/io.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#include "tagsiege/errors.hpp"

namespace tagsiege {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::int64_t parse_int(std::string_view field, std::size_t line) {
  field = trim(field);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(line, "expected an integer, got '" + std::string(field) + "'");
  }
  return value;
}

NodeId checked_node(std::int64_t value, std::size_t line) {
  if (value < 0 || value > static_cast<std::int64_t>(std::numeric_limits<NodeId>::max())) {
    fail(ErrorKind::Validation,
         "line " + std::to_string(line) + ": node id " + std::to_string(value) + " out of range");
  }
  return static_cast<NodeId>(value);
}

json parse_json_line(const std::string& text, std::size_t line) {
  try {
    json value = json::parse(text);
    if (!value.is_object()) throw ParseError(line, "expected a JSON object");
    return value;
  } catch (const json::parse_error& e) {
    throw ParseError(line, e.what());
  }
}

template <typename T>
T field(const json& object, const char* name, std::size_t line) {
  const auto it = object.find(name);
  if (it == object.end()) throw ParseError(line, std::string("missing field '") + name + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(line, std::string("field '") + name + "' has the wrong type");
  }
}

std::vector<Edge> read_edges(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open edge file " + path.string());
  const bool jsonl = path.extension() == ".jsonl";
  std::vector<Edge> edges;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty()) continue;
    std::int64_t src = 0;
    std::int64_t dst = 0;
    if (jsonl) {
      const json object = parse_json_line(std::string(text), line);
      src = field<std::int64_t>(object, "src", line);
      dst = field<std::int64_t>(object, "dst", line);
    } else {
      const auto comma = text.find(',');
      if (comma == std::string_view::npos) throw ParseError(line, "expected two columns");
      const std::string_view first = trim(text.substr(0, comma));
      if (line == 1 && first == "src") continue;
      if (text.find(',', comma + 1) != std::string_view::npos) {
        throw ParseError(line, "expected exactly two columns");
      }
      src = parse_int(first, line);
      dst = parse_int(text.substr(comma + 1), line);
    }
    const NodeId u = checked_node(src, line);
    const NodeId v = checked_node(dst, line);
    if (u == v) {
      fail(ErrorKind::Validation,
           "line " + std::to_string(line) + ": self-loop on node " + std::to_string(u));
    }
    edges.push_back(Edge::make(u, v));
  }
  return edges;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Parse, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Config, "cannot write " + path.string());
  out << contents;
}

TextAttributedGraph load_graph_files(const std::filesystem::path& node_file,
                                     const std::filesystem::path& edge_file,
                                     std::optional<int> class_count) {
  std::ifstream in(node_file);
  if (!in) fail(ErrorKind::Parse, "cannot open node file " + node_file.string());

  struct Row {
    std::string text;
    ClassId label;
    Split split;
    std::size_t line;
  };
  std::map<NodeId, Row> rows;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    const json object = parse_json_line(raw, line);
    const NodeId id = checked_node(field<std::int64_t>(object, "id", line), line);
    const auto label = field<std::int64_t>(object, "label", line);
    if (label < 0 || label > std::numeric_limits<ClassId>::max()) {
      fail(ErrorKind::Validation, "line " + std::to_string(line) + ": label " +
                                      std::to_string(label) + " out of range");
    }
    Split split = Split::Train;
    try {
      split = parse_split(field<std::string>(object, "split", line));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line, e.what());
    }
    if (!rows.emplace(id, Row{field<std::string>(object, "text", line),
                              static_cast<ClassId>(label), split, line})
             .second) {
      fail(ErrorKind::Validation,
           "line " + std::to_string(line) + ": duplicate node id " + std::to_string(id));
    }
  }

  std::vector<std::string> texts;
  std::vector<ClassId> labels;
  std::vector<Split> splits;
  ClassId max_label = -1;
  NodeId expected = 0;
  for (auto& [id, row] : rows) {
    if (id != expected) {
      fail(ErrorKind::Validation, "node ids must be contiguous from 0; missing " +
                                      std::to_string(expected));
    }
    ++expected;
    max_label = std::max(max_label, row.label);
    texts.push_back(std::move(row.text));
    labels.push_back(row.label);
    splits.push_back(row.split);
  }
  const int classes = class_count.value_or(static_cast<int>(max_label) + 1);
  return TextAttributedGraph(std::move(texts), std::move(labels), std::move(splits),
                             read_edges(edge_file), std::max(classes, 1));
}

TextAttributedGraph load_graph(const std::filesystem::path& dir, std::optional<int> class_count) {
  std::filesystem::path edges = dir / kEdgeFile;
  if (!std::filesystem::exists(edges) && std::filesystem::exists(dir / kEdgeJsonFile)) {
    edges = dir / kEdgeJsonFile;
  }
  return load_graph_files(dir / kNodeFile, edges, class_count);
}

void save_graph(const TextAttributedGraph& graph, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string nodes;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const auto id = static_cast<NodeId>(i);
    json row = {{"id", id},
                {"text", graph.text(id)},
                {"label", graph.label(id)},
                {"split", std::string(to_string(graph.split(id)))}};
    nodes += row.dump();
    nodes += '\n';
  }
  write_file(dir / kNodeFile, nodes);

  std::string edges = "src,dst\n";
  for (const Edge& e : graph.edges()) {
    edges += std::to_string(e.u);
    edges += ',';
    edges += std::to_string(e.v);
    edges += '\n';
  }
  write_file(dir / kEdgeFile, edges);
  std::filesystem::remove(dir / kEdgeJsonFile);
}

void save_plan(const PerturbationPlan& plan, const std::filesystem::path& path) {
  std::string out;
  for (const auto& [id, entry] : plan.entries) {
    json row = {{"target", entry.target},
                {"delete_neighbor", nullptr},
                {"add_influencer", nullptr},
                {"keyword", nullptr},
                {"new_text", nullptr},
                {"rationale", entry.rationale},
                {"intended_label", entry.intended_label},
                {"fallback", entry.fallback}};
    if (entry.delete_neighbor) row["delete_neighbor"] = *entry.delete_neighbor;
    if (entry.add_influencer) row["add_influencer"] = *entry.add_influencer;
    if (entry.keyword) row["keyword"] = *entry.keyword;
    if (entry.new_text) row["new_text"] = *entry.new_text;
    out += row.dump();
    out += '\n';
  }
  // Skipped targets follow the entries so a replayed plan keeps its skip list.
  for (const auto& skip : plan.skipped) {
    out += json{{"target", skip.target}, {"skipped", skip.reason}}.dump();
    out += '\n';
  }
  write_file(path, out);
}

PerturbationPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open plan file " + path.string());
  PerturbationPlan plan;
  std::string raw;
  std::size_t line = 0;
  auto optional_node = [&](const json& object, const char* name) -> std::optional<NodeId> {
    const auto it = object.find(name);
    if (it == object.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) throw ParseError(line, std::string(name) + " must be an integer");
    return checked_node(it->get<std::int64_t>(), line);
  };
  auto optional_text = [&](const json& object, const char* name) -> std::optional<std::string> {
    const auto it = object.find(name);
    if (it == object.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ParseError(line, std::string(name) + " must be a string");
    return it->get<std::string>();
  };
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    const json object = parse_json_line(raw, line);
    if (const auto it = object.find("skipped"); it != object.end()) {
      if (!it->is_string()) throw ParseError(line, "skipped must be a reason string");
      plan.skipped.push_back(
          {checked_node(field<std::int64_t>(object, "target", line), line), it->get<std::string>()});
      continue;
    }
    PlanEntry entry;
    entry.target = checked_node(field<std::int64_t>(object, "target", line), line);
    entry.delete_neighbor = optional_node(object, "delete_neighbor");
    entry.add_influencer = optional_node(object, "add_influencer");
    entry.keyword = optional_text(object, "keyword");
    entry.new_text = optional_text(object, "new_text");
    entry.rationale = object.value("rationale", std::string{});
    entry.intended_label = static_cast<ClassId>(field<std::int64_t>(object, "intended_label", line));
    entry.fallback = object.value("fallback", false);
    if (!plan.entries.emplace(entry.target, entry).second) {
      throw ParseError(line, "duplicate plan entry for target " + std::to_string(entry.target));
    }
  }
  return plan;
}

}  // namespace tagsiege
