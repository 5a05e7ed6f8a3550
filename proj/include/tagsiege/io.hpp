#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "tagsiege/graph.hpp"

namespace tagsiege {

// Dataset directory layout:
//   nodes.jsonl   {"id": int, "label": int, "split": "train"|"val"|"test", "text": str}
//   edges.csv     "src,dst" header optional; edges.jsonl {"src": int, "dst": int} also accepted

inline constexpr const char* kNodeFile = "nodes.jsonl";
inline constexpr const char* kEdgeFile = "edges.csv";
inline constexpr const char* kEdgeJsonFile = "edges.jsonl";

/// Loads and validates a dataset directory. When class_count is absent it is
/// inferred as max(label) + 1.
TextAttributedGraph load_graph(const std::filesystem::path& dir,
                               std::optional<int> class_count = std::nullopt);

/// Writes nodes.jsonl and edges.csv in canonical order; byte-stable.
void save_graph(const TextAttributedGraph& graph, const std::filesystem::path& dir);

TextAttributedGraph load_graph_files(const std::filesystem::path& node_file,
                                     const std::filesystem::path& edge_file,
                                     std::optional<int> class_count = std::nullopt);

/// Plan file: JSON Lines, one entry per target in ascending id order, then one
/// {"target", "skipped"} line per skipped target.
void save_plan(const PerturbationPlan& plan, const std::filesystem::path& path);
PerturbationPlan load_plan(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace tagsiege
