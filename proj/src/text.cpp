#include "tagsiege/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "tagsiege/errors.hpp"

namespace tagsiege {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t token_edit_distance(std::string_view a, std::string_view b) {
  std::map<std::string, long> counts;
  for (auto& token : tokenize(a)) ++counts[token];
  for (auto& token : tokenize(b)) --counts[token];
  std::size_t distance = 0;
  for (const auto& [token, count] : counts) distance += static_cast<std::size_t>(std::labs(count));
  return distance;
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> document_frequency,
                       std::size_t document_count)
    : terms_(std::move(terms)), df_(std::move(document_frequency)), document_count_(document_count) {
  if (terms_.size() != df_.size()) fail(ErrorKind::Shape, "terms and frequencies differ in length");
  idf_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (df_[i] < 1) fail(ErrorKind::Validation, "document frequency of '" + terms_[i] + "' is 0");
    index_.emplace(terms_[i], i);
    idf_.push_back(std::log((1.0 + static_cast<double>(document_count_)) /
                            (1.0 + static_cast<double>(df_[i]))) +
                   1.0);
  }
}

std::ptrdiff_t Vocabulary::index_of(std::string_view term) const {
  const auto it = index_.find(std::string(term));
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

Vocabulary build_vocabulary(std::span<const std::string> texts, std::size_t max_size) {
  if (max_size < 1) fail(ErrorKind::Config, "vocabulary max_size must be >= 1");
  std::map<std::string, std::pair<std::size_t, std::size_t>> stats;  // count, df
  for (const auto& text : texts) {
    auto tokens = tokenize(text);
    for (const auto& token : tokens) ++stats[token].first;
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (const auto& token : tokens) ++stats[token].second;
  }
  if (stats.empty()) fail(ErrorKind::EmptyCorpus, "corpus contains no tokens");

  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> ranked(stats.begin(),
                                                                                  stats.end());
  // stats is lexicographic already, so a stable sort on count keeps the tie order.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second.first > b.second.first;
  });
  if (ranked.size() > max_size) ranked.resize(max_size);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<std::string> terms;
  std::vector<std::size_t> df;
  for (auto& [term, counts] : ranked) {
    terms.push_back(term);
    df.push_back(counts.second);
  }
  return Vocabulary(std::move(terms), std::move(df), texts.size());
}

Vocabulary build_vocabulary(const TextAttributedGraph& graph, std::size_t max_size) {
  return build_vocabulary(std::span<const std::string>(graph.texts()), max_size);
}

Eigen::VectorXd featurize_text(std::string_view text, const Vocabulary& vocab) {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocab.size()));
  for (const auto& token : tokenize(text)) {
    const auto index = vocab.index_of(token);
    if (index >= 0) row[index] += 1.0;
  }
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    if (row[i] != 0.0) row[i] *= vocab.idf(static_cast<std::size_t>(i));
  }
  return row;
}

FeatureMatrix featurize(std::span<const std::string> texts, const Vocabulary& vocab) {
  if (vocab.empty()) fail(ErrorKind::Config, "cannot featurize with an empty vocabulary");
  FeatureMatrix features(static_cast<Eigen::Index>(texts.size()),
                         static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t i = 0; i < texts.size(); ++i) {
    features.row(static_cast<Eigen::Index>(i)) = featurize_text(texts[i], vocab).transpose();
  }
  return features;
}

double text_drift(const Eigen::Ref<const Eigen::VectorXd>& clean_row,
                  const Eigen::Ref<const Eigen::VectorXd>& perturbed_row) {
  if (clean_row.size() != perturbed_row.size()) {
    fail(ErrorKind::Shape, "drift rows differ in dimension: " + std::to_string(clean_row.size()) +
                               " vs " + std::to_string(perturbed_row.size()));
  }
  return (perturbed_row - clean_row).norm();
}

double estimate_lipschitz(std::span<const std::string> clean_texts,
                          std::span<const std::string> perturbed_texts, const Vocabulary& vocab) {
  if (clean_texts.size() != perturbed_texts.size()) {
    fail(ErrorKind::Shape, "clean and perturbed text lists differ in length");
  }
  double best = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < clean_texts.size(); ++i) {
    const std::size_t edits = token_edit_distance(clean_texts[i], perturbed_texts[i]);
    if (edits == 0) continue;
    any = true;
    const double drift =
        text_drift(featurize_text(clean_texts[i], vocab), featurize_text(perturbed_texts[i], vocab));
    best = std::max(best, drift / static_cast<double>(edits));
  }
  if (!any) fail(ErrorKind::DegenerateInput, "no text pair differs; Lipschitz estimate undefined");
  return best;
}

FeatureMatrix load_embeddings(const std::filesystem::path& path, std::size_t node_count) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open embedding file " + path.string());
  std::map<std::int64_t, std::vector<double>> rows;
  std::string raw;
  std::size_t line = 0;
  std::size_t dim = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json object;
    try {
      object = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line, e.what());
    }
    if (!object.is_object() || !object.contains("id") || !object.contains("vec") ||
        !object["id"].is_number_integer() || !object["vec"].is_array()) {
      throw ParseError(line, "expected {\"id\": int, \"vec\": [float, ...]}");
    }
    std::vector<double> vec;
    for (const auto& v : object["vec"]) {
      if (!v.is_number()) throw ParseError(line, "vector entries must be numbers");
      vec.push_back(v.get<double>());
      if (!std::isfinite(vec.back())) throw ParseError(line, "non-finite vector entry");
    }
    if (vec.empty()) throw ParseError(line, "empty vector");
    if (dim == 0) dim = vec.size();
    if (vec.size() != dim) {
      fail(ErrorKind::Shape, "line " + std::to_string(line) + ": dimension " +
                                 std::to_string(vec.size()) + " differs from " +
                                 std::to_string(dim));
    }
    const auto id = object["id"].get<std::int64_t>();
    if (id < 0 || static_cast<std::size_t>(id) >= node_count) {
      fail(ErrorKind::Validation, "line " + std::to_string(line) + ": id out of range");
    }
    if (!rows.emplace(id, std::move(vec)).second) {
      fail(ErrorKind::Validation, "line " + std::to_string(line) + ": duplicate id");
    }
  }
  if (rows.size() != node_count) {
    fail(ErrorKind::Shape, "embedding file has " + std::to_string(rows.size()) + " rows, expected " +
                               std::to_string(node_count));
  }
  FeatureMatrix out(static_cast<Eigen::Index>(node_count), static_cast<Eigen::Index>(dim));
  for (const auto& [id, vec] : rows) {
    for (std::size_t j = 0; j < dim; ++j) out(id, static_cast<Eigen::Index>(j)) = vec[j];
  }
  return out;
}

void save_embeddings(const std::filesystem::path& path, const Eigen::MatrixXd& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Config, "cannot write " + path.string());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    nlohmann::json row = {{"id", i}, {"vec", std::vector<double>(rows.cols())}};
    for (Eigen::Index j = 0; j < rows.cols(); ++j) row["vec"][j] = rows(i, j);
    out << row.dump() << '\n';
  }
}

}  // namespace tagsiege
