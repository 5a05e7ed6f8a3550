#include "tagsiege/nn.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "tagsiege/errors.hpp"
#include "tagsiege/rng.hpp"

namespace tagsiege::nn {

namespace {

Eigen::MatrixXd relu(const Eigen::MatrixXd& m) { return m.cwiseMax(0.0); }

Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}

void expect_weights(const Weights& w, std::size_t count) {
  if (w.size() != count) {
    fail(ErrorKind::Shape, "expected " + std::to_string(count) + " weight matrices, got " +
                               std::to_string(w.size()));
  }
}

void expect_rows(const Eigen::MatrixXd& m, Eigen::Index rows, const char* what) {
  if (m.rows() != rows) {
    fail(ErrorKind::Shape, std::string(what) + " has " + std::to_string(m.rows()) +
                               " rows, expected " + std::to_string(rows));
  }
}

}  // namespace

GcnNetwork::GcnNetwork(SparseOperator propagation, const Eigen::MatrixXd& features)
    : propagation_(std::move(propagation)) {
  if (propagation_.rows() != features.rows()) {
    fail(ErrorKind::Shape, "adjacency is " + std::to_string(propagation_.rows()) +
                               " nodes but features have " + std::to_string(features.rows()) +
                               " rows");
  }
  propagated_features_ = propagation_ * features;
}

Eigen::MatrixXd GcnNetwork::hidden(const Weights& w) const {
  expect_weights(w, 2);
  expect_rows(w[0], propagated_features_.cols(), "W1");
  return relu(propagated_features_ * w[0]);
}

Eigen::MatrixXd GcnNetwork::logits(const Weights& w) const {
  const Eigen::MatrixXd h = hidden(w);
  expect_rows(w[1], h.cols(), "W2");
  return propagation_ * (h * w[1]);
}

Weights GcnNetwork::backward(const Weights& w, const Eigen::MatrixXd& dlogits) const {
  const Eigen::MatrixXd pre = propagated_features_ * w[0];
  const Eigen::MatrixXd h = relu(pre);
  // logits = A (H W2) with A symmetric, so dL/d(H W2) = A^T G = A G.
  const Eigen::MatrixXd dhw = propagation_ * dlogits;
  Weights grads(2);
  grads[1] = h.transpose() * dhw;
  const Eigen::MatrixXd dpre = (dhw * w[1].transpose()).cwiseProduct(relu_mask(pre));
  grads[0] = propagated_features_.transpose() * dpre;
  return grads;
}

std::vector<Eigen::ArrayXX<bool>> GcnNetwork::activation_pattern(const Weights& w) const {
  return {(propagated_features_ * w[0]).array() > 0.0};
}

SgcNetwork::SgcNetwork(const SparseOperator& propagation, const Eigen::MatrixXd& features,
                       int hops) {
  if (propagation.rows() != features.rows()) {
    fail(ErrorKind::Shape, "adjacency and feature rows differ");
  }
  if (hops < 0) fail(ErrorKind::Config, "SGC hops must be >= 0");
  propagated_features_ = features;
  for (int k = 0; k < hops; ++k) propagated_features_ = propagation * propagated_features_;
}

Eigen::MatrixXd SgcNetwork::logits(const Weights& w) const {
  expect_weights(w, 1);
  expect_rows(w[0], propagated_features_.cols(), "W");
  return propagated_features_ * w[0];
}

Weights SgcNetwork::backward(const Weights& w, const Eigen::MatrixXd& dlogits) const {
  (void)w;
  return {propagated_features_.transpose() * dlogits};
}

SageMeanNetwork::SageMeanNetwork(SparseOperator mean_aggregator, const Eigen::MatrixXd& features)
    : aggregator_(std::move(mean_aggregator)), features_(features) {
  if (aggregator_.rows() != features.rows()) {
    fail(ErrorKind::Shape, "aggregator and feature rows differ");
  }
  aggregated_features_ = aggregator_ * features_;
}

Eigen::MatrixXd SageMeanNetwork::logits(const Weights& w) const {
  expect_weights(w, 4);
  expect_rows(w[0], features_.cols(), "Ws1");
  expect_rows(w[1], features_.cols(), "Wn1");
  const Eigen::MatrixXd h = relu(features_ * w[0] + aggregated_features_ * w[1]);
  expect_rows(w[2], h.cols(), "Ws2");
  expect_rows(w[3], h.cols(), "Wn2");
  return h * w[2] + aggregator_ * (h * w[3]);
}

Weights SageMeanNetwork::backward(const Weights& w, const Eigen::MatrixXd& dlogits) const {
  const Eigen::MatrixXd pre = features_ * w[0] + aggregated_features_ * w[1];
  const Eigen::MatrixXd h = relu(pre);
  const Eigen::MatrixXd agg_h = aggregator_ * h;
  Weights grads(4);
  grads[2] = h.transpose() * dlogits;
  grads[3] = agg_h.transpose() * dlogits;
  const Eigen::MatrixXd dh = dlogits * w[2].transpose() +
                             Eigen::MatrixXd(aggregator_.transpose() * (dlogits * w[3].transpose()));
  const Eigen::MatrixXd dpre = dh.cwiseProduct(relu_mask(pre));
  grads[0] = features_.transpose() * dpre;
  grads[1] = aggregated_features_.transpose() * dpre;
  return grads;
}

std::vector<Eigen::ArrayXX<bool>> SageMeanNetwork::activation_pattern(const Weights& w) const {
  return {(features_ * w[0] + aggregated_features_ * w[1]).array() > 0.0};
}

SparseOperator mean_aggregator(const TextAttributedGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.edge_count() * 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto neighbors = graph.neighbors(static_cast<NodeId>(i));
    const double weight = neighbors.empty() ? 0.0 : 1.0 / static_cast<double>(neighbors.size());
    for (NodeId j : neighbors) triplets.emplace_back(i, static_cast<Eigen::Index>(j), weight);
  }
  SparseOperator op(n, n);
  op.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

Eigen::MatrixXd glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = (2.0 * unit_uniform(rng) - 1.0) * limit;
  }
  return m;
}

namespace {

struct SoftmaxLoss {
  double loss = 0.0;
  Eigen::MatrixXd dlogits;
};

SoftmaxLoss softmax_cross_entropy(const Eigen::MatrixXd& logits, std::span<const ClassId> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    fail(ErrorKind::Shape, "labels do not match logit rows");
  }
  std::size_t active = 0;
  for (ClassId y : labels) {
    if (y >= 0) ++active;
  }
  SoftmaxLoss out;
  out.dlogits = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());
  if (active == 0) return out;
  const double scale = 1.0 / static_cast<double>(active);
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const ClassId y = labels[static_cast<std::size_t>(i)];
    if (y < 0) continue;
    if (y >= logits.cols()) fail(ErrorKind::Shape, "label exceeds logit width");
    const double max = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd shifted = logits.row(i).array() - max;
    const Eigen::RowVectorXd exps = shifted.array().exp();
    const double sum = exps.sum();
    out.loss += (std::log(sum) - shifted[y]) * scale;
    out.dlogits.row(i) = exps / sum * scale;
    out.dlogits(i, y) -= scale;
  }
  return out;
}

bool same_pattern(const std::vector<Eigen::ArrayXX<bool>>& a,
                  const std::vector<Eigen::ArrayXX<bool>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols() || (a[i] != b[i]).any()) {
      return false;
    }
  }
  return true;
}

double decay_term(const Weights& weights, double weight_decay) {
  if (weight_decay == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& w : weights) sum += w.squaredNorm();
  return 0.5 * weight_decay * sum;
}

}  // namespace

LossResult cross_entropy(const Network& net, const Weights& weights,
                         std::span<const ClassId> labels, double weight_decay) {
  const SoftmaxLoss sl = softmax_cross_entropy(net.logits(weights), labels);
  LossResult result;
  result.loss = sl.loss + decay_term(weights, weight_decay);
  result.gradients = net.backward(weights, sl.dlogits);
  if (weight_decay != 0.0) {
    for (std::size_t k = 0; k < weights.size(); ++k) result.gradients[k] += weight_decay * weights[k];
  }
  return result;
}

double cross_entropy_loss(const Network& net, const Weights& weights,
                          std::span<const ClassId> labels, double weight_decay) {
  return softmax_cross_entropy(net.logits(weights), labels).loss +
         decay_term(weights, weight_decay);
}

Weights train(const Network& net, Weights weights, std::span<const ClassId> labels,
              const AdamConfig& config, TrainingTrace* trace) {
  Weights m;
  Weights v;
  for (const auto& w : weights) {
    m.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    v.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  }
  constexpr std::size_t kWindow = 10;
  std::deque<double> window;
  double best_smoothed = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  double beta1_power = 1.0;
  double beta2_power = 1.0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    LossResult step = cross_entropy(net, weights, labels, config.weight_decay);
    if (!std::isfinite(step.loss)) {
      fail(ErrorKind::Training, "loss diverged at epoch " + std::to_string(epoch));
    }
    if (trace) trace->losses.push_back(step.loss);

    beta1_power *= config.beta1;
    beta2_power *= config.beta2;
    const double step_size = config.lr * std::sqrt(1.0 - beta2_power) / (1.0 - beta1_power);
    for (std::size_t k = 0; k < weights.size(); ++k) {
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * step.gradients[k];
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * step.gradients[k].cwiseAbs2();
      weights[k].array() -= step_size * m[k].array() /
                            (v[k].array().sqrt() + config.eps * std::sqrt(1.0 - beta2_power));
    }

    window.push_back(step.loss);
    if (window.size() > kWindow) window.pop_front();
    if (config.patience > 0 && window.size() == kWindow) {
      const double smoothed = std::accumulate(window.begin(), window.end(), 0.0) / kWindow;
      if (smoothed < best_smoothed - 1e-9) {
        best_smoothed = smoothed;
        since_best = 0;
      } else if (++since_best >= config.patience) {
        if (trace) trace->early_stopped = true;
        break;
      }
    }
  }
  return weights;
}

GradientCheckResult gradient_check(const Network& net, const Weights& weights,
                                   std::span<const ClassId> labels,
                                   const GradientCheckOptions& options) {
  const LossResult analytic = cross_entropy(net, weights, labels, options.weight_decay);
  const auto base_pattern = net.activation_pattern(weights);
  auto rng = substream(options.seed, "gradient-check");
  GradientCheckResult result;

  Weights probe = weights;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const auto size = static_cast<std::uint64_t>(weights[k].size());
    const std::size_t samples = std::min<std::size_t>(options.samples_per_matrix, size);
    for (std::size_t s = 0; s < samples; ++s) {
      // Exhaustive when the sample budget covers the matrix, random otherwise.
      const auto flat = static_cast<Eigen::Index>(samples == size ? s : uniform_index(rng, size));
      double& coord = probe[k].data()[flat];
      const double original = coord;

      coord = original + options.step;
      const bool kink_plus = !same_pattern(net.activation_pattern(probe), base_pattern);
      const double loss_plus = cross_entropy_loss(net, probe, labels, options.weight_decay);
      coord = original - options.step;
      const bool kink_minus = !same_pattern(net.activation_pattern(probe), base_pattern);
      const double loss_minus = cross_entropy_loss(net, probe, labels, options.weight_decay);
      coord = original;

      if (kink_plus || kink_minus) {
        ++result.skipped_kinks;
        continue;
      }
      const double numeric = (loss_plus - loss_minus) / (2.0 * options.step);
      const double exact = analytic.gradients[k].data()[flat];
      const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-6});
      result.max_relative_error =
          std::max(result.max_relative_error, std::abs(exact - numeric) / denom);
      ++result.checked;
    }
  }
  return result;
}

std::vector<ClassId> argmax_rows(const Eigen::MatrixXd& logits) {
  std::vector<ClassId> out(static_cast<std::size_t>(logits.rows()), 0);
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < logits.cols(); ++j) {
      if (logits(i, j) > logits(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = static_cast<ClassId>(best);
  }
  return out;
}

}  // namespace tagsiege::nn
