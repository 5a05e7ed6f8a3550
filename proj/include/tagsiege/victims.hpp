#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "tagsiege/graph.hpp"
#include "tagsiege/nn.hpp"
#include "tagsiege/text.hpp"

namespace tagsiege {

enum class VictimKind { Gcn, Sgc, SageMean };

std::string_view to_string(VictimKind kind);
VictimKind parse_victim_kind(std::string_view name);

struct VictimConfig {
  std::size_t hidden = 64;
  double lr = 0.01;
  std::size_t epochs = 200;
  double weight_decay = 5e-4;
  /// Propagation steps for SGC.
  int sgc_hops = 2;
  std::uint64_t seed = 0;
};

/// A trained GNN reasoner. It only ever sees a graph and its feature matrix.
class VictimModel {
 public:
  VictimModel(VictimKind kind, VictimConfig config, nn::Weights weights);

  VictimKind kind() const noexcept { return kind_; }
  const VictimConfig& config() const noexcept { return config_; }
  const nn::Weights& weights() const noexcept { return weights_; }
  /// Accuracy on the validation split at the end of training (NaN without val nodes).
  double validation_accuracy() const noexcept { return validation_accuracy_; }
  void set_validation_accuracy(double value) { validation_accuracy_ = value; }

  Eigen::MatrixXd logits(const TextAttributedGraph& graph, const FeatureMatrix& features) const;

 private:
  VictimKind kind_;
  VictimConfig config_;
  nn::Weights weights_;
  double validation_accuracy_;
};

/// Builds the propagation network of `kind` over (graph, features).
std::unique_ptr<nn::Network> make_victim_network(VictimKind kind, const TextAttributedGraph& graph,
                                                 const FeatureMatrix& features,
                                                 const VictimConfig& config);

/// Throws Config when the train split is empty, Shape when feature rows do not
/// match the node count, Training when the loss diverges.
VictimModel train_victim(VictimKind kind, const TextAttributedGraph& graph,
                         const FeatureMatrix& features, const VictimConfig& config);

std::vector<ClassId> predict(const VictimModel& model, const TextAttributedGraph& graph,
                             const FeatureMatrix& features);

/// Throws DegenerateInput for an empty node set.
double accuracy(const VictimModel& model, const TextAttributedGraph& graph,
                const FeatureMatrix& features, std::span<const NodeId> nodes);

void save_victim(const VictimModel& model, const std::filesystem::path& path);
VictimModel load_victim(const std::filesystem::path& path);

}  // namespace tagsiege
