#include "tagsiege/retrieval.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

#include "tagsiege/errors.hpp"
#include "tagsiege/io.hpp"

namespace tagsiege {

Dissimilarity cosine_dissimilarity(const Eigen::Ref<const Eigen::VectorXd>& a,
                                   const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) fail(ErrorKind::Shape, "cosine operands differ in dimension");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return {1.0, true};
  const double value = 1.0 - a.dot(b) / (na * nb);
  return {std::clamp(value, 0.0, 2.0), false};
}

double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) fail(ErrorKind::Shape, "cosine operands differ in dimension");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

InfluencerSet retrieve_influencers(const Eigen::MatrixXd& embeddings, NodeId target,
                                   std::size_t k) {
  const auto n = static_cast<std::size_t>(embeddings.rows());
  if (target >= n) {
    fail(ErrorKind::Index, "target " + std::to_string(target) + " outside [0, " +
                               std::to_string(n) + ")");
  }
  if (k < 1) fail(ErrorKind::Config, "influencer count K must be >= 1");
  if (n < 2) fail(ErrorKind::DegenerateInput, "retrieval needs at least two nodes");

  const Eigen::VectorXd z = embeddings.row(target).transpose();
  std::vector<Candidate> all;
  all.reserve(n - 1);
  for (std::size_t v = 0; v < n; ++v) {
    if (v == target) continue;
    all.push_back({static_cast<NodeId>(v),
                   cosine_dissimilarity(z, embeddings.row(static_cast<Eigen::Index>(v)).transpose())
                       .value});
  }
  const std::size_t keep = std::min(k, all.size());
  const auto order = [](const Candidate& a, const Candidate& b) {
    if (a.dissimilarity != b.dissimilarity) return a.dissimilarity > b.dissimilarity;
    return a.node < b.node;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), order);
  all.resize(keep);
  return InfluencerSet{target, std::move(all)};
}

std::map<NodeId, InfluencerSet> retrieve_all(const Eigen::MatrixXd& embeddings,
                                             std::span<const NodeId> targets, std::size_t k) {
  std::map<NodeId, InfluencerSet> out;
  for (NodeId target : targets) {
    if (!out.contains(target)) out.emplace(target, retrieve_influencers(embeddings, target, k));
  }
  return out;
}

void save_influencers(const std::map<NodeId, InfluencerSet>& sets,
                      const std::filesystem::path& path) {
  std::string out;
  for (const auto& [target, set] : sets) {
    nlohmann::json candidates = nlohmann::json::array();
    for (const auto& c : set.candidates) candidates.push_back({c.node, c.dissimilarity});
    out += nlohmann::json{{"target", target}, {"candidates", candidates}}.dump();
    out += '\n';
  }
  write_file(path, out);
}

std::map<NodeId, InfluencerSet> load_influencers(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open influencer file " + path.string());
  std::map<NodeId, InfluencerSet> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto doc = nlohmann::json::parse(raw);
      InfluencerSet set;
      set.target = doc.at("target").get<NodeId>();
      for (const auto& pair : doc.at("candidates")) {
        set.candidates.push_back({pair.at(0).get<NodeId>(), pair.at(1).get<double>()});
      }
      out.emplace(set.target, std::move(set));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line, e.what());
    }
  }
  return out;
}

}  // namespace tagsiege
