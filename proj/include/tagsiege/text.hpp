#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tagsiege/graph.hpp"

namespace tagsiege {

using FeatureMatrix = Eigen::MatrixXd;

/// Lowercases and splits on runs of non-alphanumeric ASCII characters.
std::vector<std::string> tokenize(std::string_view text);

/// Multiset symmetric difference between the token bags of two texts.
std::size_t token_edit_distance(std::string_view a, std::string_view b);

/// Term index frozen on the clean corpus.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> document_frequency,
             std::size_t document_count);

  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  std::size_t document_count() const noexcept { return document_count_; }

  /// -1 when the term is unknown.
  std::ptrdiff_t index_of(std::string_view term) const;
  const std::string& term(std::size_t index) const { return terms_.at(index); }
  std::size_t document_frequency(std::size_t index) const { return df_.at(index); }
  /// Smoothed inverse document frequency log((1+N)/(1+df)) + 1.
  double idf(std::size_t index) const { return idf_.at(index); }

  const std::vector<std::string>& terms() const noexcept { return terms_; }

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::vector<double> idf_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t document_count_ = 0;
};

/// Keeps the max_size terms with the largest corpus counts, ties broken
/// lexicographically. Indices are assigned in lexicographic term order.
Vocabulary build_vocabulary(std::span<const std::string> texts, std::size_t max_size);
Vocabulary build_vocabulary(const TextAttributedGraph& graph, std::size_t max_size);

/// Raw term count times smoothed idf. Unknown tokens are dropped.
FeatureMatrix featurize(std::span<const std::string> texts, const Vocabulary& vocab);
Eigen::VectorXd featurize_text(std::string_view text, const Vocabulary& vocab);

/// Realized feature deviation ||x' - x||_2.
double text_drift(const Eigen::Ref<const Eigen::VectorXd>& clean_row,
                  const Eigen::Ref<const Eigen::VectorXd>& perturbed_row);

/// max over changed pairs of drift / token edits: an empirical lower bound on
/// the encoder's Lipschitz constant.
double estimate_lipschitz(std::span<const std::string> clean_texts,
                          std::span<const std::string> perturbed_texts, const Vocabulary& vocab);

/// JSONL {"id": int, "vec": [float, ...]} with uniform dimension.
FeatureMatrix load_embeddings(const std::filesystem::path& path, std::size_t node_count);
void save_embeddings(const std::filesystem::path& path, const Eigen::MatrixXd& rows);

}  // namespace tagsiege
