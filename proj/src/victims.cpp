#include "tagsiege/victims.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

#include "tagsiege/encoder.hpp"
#include "tagsiege/errors.hpp"
#include "tagsiege/io.hpp"
#include "tagsiege/rng.hpp"

namespace tagsiege {

std::string_view to_string(VictimKind kind) {
  switch (kind) {
    case VictimKind::Gcn: return "gcn";
    case VictimKind::Sgc: return "sgc";
    case VictimKind::SageMean: return "sage_mean";
  }
  return "gcn";
}

VictimKind parse_victim_kind(std::string_view name) {
  if (name == "gcn") return VictimKind::Gcn;
  if (name == "sgc") return VictimKind::Sgc;
  if (name == "sage_mean" || name == "sage") return VictimKind::SageMean;
  fail(ErrorKind::Config, "unknown victim '" + std::string(name) + "'");
}

VictimModel::VictimModel(VictimKind kind, VictimConfig config, nn::Weights weights)
    : kind_(kind),
      config_(config),
      weights_(std::move(weights)),
      validation_accuracy_(std::numeric_limits<double>::quiet_NaN()) {
  for (const auto& w : weights_) {
    if (!w.allFinite()) fail(ErrorKind::Training, "victim weights are not finite");
  }
}

std::unique_ptr<nn::Network> make_victim_network(VictimKind kind, const TextAttributedGraph& graph,
                                                 const FeatureMatrix& features,
                                                 const VictimConfig& config) {
  if (static_cast<std::size_t>(features.rows()) != graph.node_count()) {
    fail(ErrorKind::Shape, "feature rows (" + std::to_string(features.rows()) +
                               ") do not match node count (" +
                               std::to_string(graph.node_count()) + ")");
  }
  switch (kind) {
    case VictimKind::Gcn:
      return std::make_unique<nn::GcnNetwork>(normalize_adjacency(graph), features);
    case VictimKind::Sgc:
      return std::make_unique<nn::SgcNetwork>(normalize_adjacency(graph), features,
                                              config.sgc_hops);
    case VictimKind::SageMean:
      return std::make_unique<nn::SageMeanNetwork>(nn::mean_aggregator(graph), features);
  }
  fail(ErrorKind::Config, "unknown victim kind");
}

Eigen::MatrixXd VictimModel::logits(const TextAttributedGraph& graph,
                                    const FeatureMatrix& features) const {
  return make_victim_network(kind_, graph, features, config_)->logits(weights_);
}

VictimModel train_victim(VictimKind kind, const TextAttributedGraph& graph,
                         const FeatureMatrix& features, const VictimConfig& config) {
  if (graph.nodes_in(Split::Train).empty()) {
    fail(ErrorKind::Config, "victim training needs at least one train node");
  }
  if (config.hidden == 0) fail(ErrorKind::Config, "victim hidden size must be >= 1");
  const auto net = make_victim_network(kind, graph, features, config);
  auto rng = substream(config.seed, "victim/" + std::string(to_string(kind)) + "/init");
  const auto d = static_cast<std::size_t>(features.cols());
  const auto h = config.hidden;
  const auto c = static_cast<std::size_t>(graph.class_count());
  nn::Weights init;
  switch (kind) {
    case VictimKind::Gcn:
      init = {nn::glorot_uniform(d, h, rng), nn::glorot_uniform(h, c, rng)};
      break;
    case VictimKind::Sgc:
      init = {nn::glorot_uniform(d, c, rng)};
      break;
    case VictimKind::SageMean:
      init = {nn::glorot_uniform(d, h, rng), nn::glorot_uniform(d, h, rng),
              nn::glorot_uniform(h, c, rng), nn::glorot_uniform(h, c, rng)};
      break;
  }
  nn::AdamConfig adam;
  adam.lr = config.lr;
  adam.epochs = config.epochs;
  adam.weight_decay = config.weight_decay;
  const auto labels = train_labels(graph);
  VictimModel model(kind, config, nn::train(*net, std::move(init), labels, adam));

  const auto val = graph.nodes_in(Split::Val);
  if (!val.empty()) {
    const auto predicted = nn::argmax_rows(net->logits(model.weights()));
    std::size_t correct = 0;
    for (NodeId v : val) correct += predicted[v] == graph.label(v) ? 1 : 0;
    model.set_validation_accuracy(static_cast<double>(correct) / static_cast<double>(val.size()));
  }
  return model;
}

std::vector<ClassId> predict(const VictimModel& model, const TextAttributedGraph& graph,
                             const FeatureMatrix& features) {
  return nn::argmax_rows(model.logits(graph, features));
}

double accuracy(const VictimModel& model, const TextAttributedGraph& graph,
                const FeatureMatrix& features, std::span<const NodeId> nodes) {
  if (nodes.empty()) fail(ErrorKind::DegenerateInput, "accuracy over an empty node set");
  const auto predicted = predict(model, graph, features);
  std::size_t correct = 0;
  for (NodeId v : nodes) {
    if (v >= graph.node_count()) fail(ErrorKind::Index, "accuracy node outside the graph");
    correct += predicted[v] == graph.label(v) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

void save_victim(const VictimModel& model, const std::filesystem::path& path) {
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& w : model.weights()) {
    std::vector<double> data;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) data.push_back(w(i, j));
    }
    weights.push_back({{"rows", w.rows()}, {"cols", w.cols()}, {"data", data}});
  }
  const auto& c = model.config();
  const nlohmann::json doc = {
      {"format", "tagsiege-victim"},
      {"kind", std::string(to_string(model.kind()))},
      {"config",
       {{"hidden", c.hidden}, {"lr", c.lr}, {"epochs", c.epochs}, {"weight_decay", c.weight_decay},
        {"sgc_hops", c.sgc_hops}, {"seed", c.seed}}},
      {"weights", weights}};
  write_file(path, doc.dump() + "\n");
}

VictimModel load_victim(const std::filesystem::path& path) {
  try {
    const auto doc = nlohmann::json::parse(read_file(path));
    if (doc.value("format", "") != "tagsiege-victim") {
      fail(ErrorKind::Parse, path.string() + " is not a victim checkpoint");
    }
    VictimConfig c;
    const auto& jc = doc.at("config");
    c.hidden = jc.at("hidden");
    c.lr = jc.at("lr");
    c.epochs = jc.at("epochs");
    c.weight_decay = jc.at("weight_decay");
    c.sgc_hops = jc.at("sgc_hops");
    c.seed = jc.at("seed");
    nn::Weights weights;
    for (const auto& jw : doc.at("weights")) {
      const auto rows = jw.at("rows").get<Eigen::Index>();
      const auto cols = jw.at("cols").get<Eigen::Index>();
      const auto data = jw.at("data").get<std::vector<double>>();
      if (static_cast<std::size_t>(rows * cols) != data.size()) {
        fail(ErrorKind::Shape, "victim checkpoint matrix shape mismatch");
      }
      Eigen::MatrixXd m(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = data[static_cast<std::size_t>(i * cols + j)];
      }
      weights.push_back(std::move(m));
    }
    return VictimModel(parse_victim_kind(doc.at("kind").get<std::string>()), c, std::move(weights));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

}  // namespace tagsiege
