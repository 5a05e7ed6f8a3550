#include "tagsiege/encoder.hpp"

#include <cmath>

#include "json.hpp"

#include "tagsiege/errors.hpp"
#include "tagsiege/io.hpp"
#include "tagsiege/rng.hpp"

namespace tagsiege {

nn::SparseOperator normalize_adjacency(const TextAttributedGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  std::vector<double> inv_sqrt_degree(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    inv_sqrt_degree[static_cast<std::size_t>(i)] =
        1.0 / std::sqrt(static_cast<double>(graph.degree(static_cast<NodeId>(i)) + 1));
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.edge_count() * 2 + static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double di = inv_sqrt_degree[static_cast<std::size_t>(i)];
    triplets.emplace_back(i, i, di * di);
    for (NodeId j : graph.neighbors(static_cast<NodeId>(i))) {
      triplets.emplace_back(i, static_cast<Eigen::Index>(j), di * inv_sqrt_degree[j]);
    }
  }
  nn::SparseOperator op(n, n);
  op.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

EncoderOutput forward(const EncoderParams& params, const nn::SparseOperator& adjacency,
                      const FeatureMatrix& features) {
  if (features.cols() != params.w1.rows()) {
    fail(ErrorKind::Shape, "feature width " + std::to_string(features.cols()) +
                               " does not match W1 rows " + std::to_string(params.w1.rows()));
  }
  if (params.w1.cols() != params.w2.rows()) fail(ErrorKind::Shape, "W1/W2 inner dimensions differ");
  const nn::GcnNetwork net(adjacency, features);
  const nn::Weights weights{params.w1, params.w2};
  EncoderOutput out;
  out.embeddings = net.hidden(weights);
  out.logits = adjacency * (out.embeddings * params.w2);
  return out;
}

std::vector<ClassId> train_labels(const TextAttributedGraph& graph) {
  std::vector<ClassId> labels(graph.node_count(), -1);
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    if (graph.splits()[i] == Split::Train) labels[i] = graph.labels()[i];
  }
  return labels;
}

EncoderParams train_encoder(const TextAttributedGraph& graph, const FeatureMatrix& features,
                            const EncoderConfig& config, nn::TrainingTrace* trace) {
  if (graph.nodes_in(Split::Train).empty()) {
    fail(ErrorKind::Config, "encoder training needs at least one train node");
  }
  if (static_cast<std::size_t>(features.rows()) != graph.node_count()) {
    fail(ErrorKind::Shape, "feature rows do not match node count");
  }
  if (config.hidden == 0) fail(ErrorKind::Config, "encoder hidden size must be >= 1");
  auto rng = substream(config.seed, "encoder/init");
  nn::Weights init{
      nn::glorot_uniform(static_cast<std::size_t>(features.cols()), config.hidden, rng),
      nn::glorot_uniform(config.hidden, static_cast<std::size_t>(graph.class_count()), rng)};
  const nn::GcnNetwork net(normalize_adjacency(graph), features);
  nn::AdamConfig adam;
  adam.lr = config.lr;
  adam.epochs = config.epochs;
  adam.weight_decay = config.weight_decay;
  const auto labels = train_labels(graph);
  nn::Weights trained = nn::train(net, std::move(init), labels, adam, trace);
  return EncoderParams{std::move(trained[0]), std::move(trained[1])};
}

nn::GradientCheckResult gradient_check(const EncoderParams& params,
                                       const nn::SparseOperator& adjacency,
                                       const FeatureMatrix& features,
                                       std::span<const ClassId> labels,
                                       const nn::GradientCheckOptions& options) {
  const nn::GcnNetwork net(adjacency, features);
  return nn::gradient_check(net, {params.w1, params.w2}, labels, options);
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
    fail(ErrorKind::Shape, "checkpoint matrix shape does not match its data");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[static_cast<std::size_t>(i * cols + c)];
  }
  return m;
}

}  // namespace

void save_encoder(const EncoderParams& params, const std::filesystem::path& path) {
  const nlohmann::json doc = {{"format", "tagsiege-encoder"},
                              {"version", 1},
                              {"w1", matrix_to_json(params.w1)},
                              {"w2", matrix_to_json(params.w2)}};
  write_file(path, doc.dump() + "\n");
}

EncoderParams load_encoder(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
    if (doc.value("format", "") != "tagsiege-encoder") {
      fail(ErrorKind::Parse, path.string() + " is not an encoder checkpoint");
    }
    EncoderParams params{matrix_from_json(doc.at("w1")), matrix_from_json(doc.at("w2"))};
    if (params.w1.cols() != params.w2.rows()) fail(ErrorKind::Shape, "checkpoint W1/W2 mismatch");
    return params;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

}  // namespace tagsiege
