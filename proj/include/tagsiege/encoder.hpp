#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tagsiege/graph.hpp"
#include "tagsiege/nn.hpp"
#include "tagsiege/text.hpp"

namespace tagsiege {

using EmbeddingMatrix = Eigen::MatrixXd;

/// D^{-1/2} (A + I) D^{-1/2} as a symmetric sparse operator.
nn::SparseOperator normalize_adjacency(const TextAttributedGraph& graph);

struct EncoderConfig {
  /// Width of the hidden layer, which is also the embedding dimension.
  std::size_t hidden = 64;
  double lr = 0.01;
  std::size_t epochs = 200;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
};

/// Weights of the retrieval encoder: W1 (d x h), W2 (h x C).
struct EncoderParams {
  Eigen::MatrixXd w1;
  Eigen::MatrixXd w2;

  bool operator==(const EncoderParams& other) const {
    return w1.rows() == other.w1.rows() && w1.cols() == other.w1.cols() &&
           w2.rows() == other.w2.rows() && w2.cols() == other.w2.cols() && w1 == other.w1 &&
           w2 == other.w2;
  }
};

struct EncoderOutput {
  Eigen::MatrixXd logits;
  /// Penultimate activations relu(A X W1); row i is z_i.
  EmbeddingMatrix embeddings;
};

EncoderOutput forward(const EncoderParams& params, const nn::SparseOperator& adjacency,
                      const FeatureMatrix& features);

/// Train-split cross-entropy with full-batch Adam. Throws Config when the
/// graph has no train nodes.
EncoderParams train_encoder(const TextAttributedGraph& graph, const FeatureMatrix& features,
                            const EncoderConfig& config, nn::TrainingTrace* trace = nullptr);

/// Labels < 0 are excluded from the loss.
nn::GradientCheckResult gradient_check(const EncoderParams& params,
                                       const nn::SparseOperator& adjacency,
                                       const FeatureMatrix& features,
                                       std::span<const ClassId> labels,
                                       const nn::GradientCheckOptions& options = {});

/// JSON checkpoint: {"format": "tagsiege-encoder", "w1": {"rows","cols","data"}, ...}.
void save_encoder(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams load_encoder(const std::filesystem::path& path);

/// Labels restricted to the train split, -1 elsewhere.
std::vector<ClassId> train_labels(const TextAttributedGraph& graph);

}  // namespace tagsiege
