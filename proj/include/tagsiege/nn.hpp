#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tagsiege/graph.hpp"

namespace tagsiege::nn {

using Weights = std::vector<Eigen::MatrixXd>;
using SparseOperator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// A differentiable node classifier over a fixed graph and feature matrix.
/// Implementations precompute whatever propagation they can at construction.
class Network {
 public:
  virtual ~Network() = default;

  virtual Eigen::MatrixXd logits(const Weights& weights) const = 0;
  /// Gradient of sum(dlogits .* logits(weights)) with respect to every weight matrix.
  virtual Weights backward(const Weights& weights, const Eigen::MatrixXd& dlogits) const = 0;
  /// Sign pattern of every relu pre-activation; empty for linear networks.
  virtual std::vector<Eigen::ArrayXX<bool>> activation_pattern(const Weights& weights) const {
    (void)weights;
    return {};
  }
};

/// Two-layer graph convolution: H = relu(A X W1), logits = A H W2.
class GcnNetwork final : public Network {
 public:
  GcnNetwork(SparseOperator propagation, const Eigen::MatrixXd& features);

  Eigen::MatrixXd logits(const Weights& w) const override;
  Eigen::MatrixXd hidden(const Weights& w) const;
  Weights backward(const Weights& w, const Eigen::MatrixXd& dlogits) const override;
  std::vector<Eigen::ArrayXX<bool>> activation_pattern(const Weights& w) const override;

 private:
  SparseOperator propagation_;
  Eigen::MatrixXd propagated_features_;
};

/// Linear classifier on K-step propagated features: logits = A^K X W.
class SgcNetwork final : public Network {
 public:
  SgcNetwork(const SparseOperator& propagation, const Eigen::MatrixXd& features, int hops);

  Eigen::MatrixXd logits(const Weights& w) const override;
  Weights backward(const Weights& w, const Eigen::MatrixXd& dlogits) const override;

 private:
  Eigen::MatrixXd propagated_features_;
};

/// Mean-aggregation GraphSAGE, two layers:
/// H = relu(X Ws1 + M X Wn1), logits = H Ws2 + M H Wn2.
class SageMeanNetwork final : public Network {
 public:
  SageMeanNetwork(SparseOperator mean_aggregator, const Eigen::MatrixXd& features);

  Eigen::MatrixXd logits(const Weights& w) const override;
  Weights backward(const Weights& w, const Eigen::MatrixXd& dlogits) const override;
  std::vector<Eigen::ArrayXX<bool>> activation_pattern(const Weights& w) const override;

 private:
  SparseOperator aggregator_;
  Eigen::MatrixXd features_;
  Eigen::MatrixXd aggregated_features_;
};

/// Row-normalized adjacency without self loops; isolated rows are zero.
SparseOperator mean_aggregator(const TextAttributedGraph& graph);

/// Glorot-uniform matrix, limit sqrt(6 / (rows + cols)).
Eigen::MatrixXd glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

struct LossResult {
  double loss = 0.0;
  Weights gradients;
};

/// Mean softmax cross-entropy over nodes with label >= 0 plus
/// 0.5 * weight_decay * sum ||W||^2. Labels < 0 are masked out.
LossResult cross_entropy(const Network& net, const Weights& weights,
                         std::span<const ClassId> labels, double weight_decay);

double cross_entropy_loss(const Network& net, const Weights& weights,
                          std::span<const ClassId> labels, double weight_decay);

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 5e-4;
  std::size_t epochs = 200;
  /// Stop once the 10-epoch moving-average loss has not improved for this
  /// many epochs; 0 disables early stopping.
  std::size_t patience = 30;
};

struct TrainingTrace {
  std::vector<double> losses;
  bool early_stopped = false;
};

/// Full-batch Adam, single-threaded and deterministic.
Weights train(const Network& net, Weights init, std::span<const ClassId> labels,
              const AdamConfig& config, TrainingTrace* trace = nullptr);

struct GradientCheckOptions {
  double step = 1e-5;
  /// Random coordinates probed per matrix; all of them when the matrix is smaller.
  std::size_t samples_per_matrix = 40;
  std::uint64_t seed = 7;
  double weight_decay = 0.0;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  /// Coordinates whose +/- step flips a relu sign, excluded from the check.
  std::size_t skipped_kinks = 0;
};

/// Central finite differences against the analytic gradient. Relative error
/// is |a - n| / max(|a|, |n|, 1e-6).
GradientCheckResult gradient_check(const Network& net, const Weights& weights,
                                   std::span<const ClassId> labels,
                                   const GradientCheckOptions& options = {});

/// Row-wise argmax with ties resolved to the lowest column.
std::vector<ClassId> argmax_rows(const Eigen::MatrixXd& logits);

}  // namespace tagsiege::nn
