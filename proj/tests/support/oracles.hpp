#pragma once

// Independent reference computations. Each one is written directly from the
// defining formula with dense matrices and plain loops, and deliberately
// shares no code with the library beyond its data types.

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tagsiege/graph.hpp"

namespace oracle {

using tagsiege::ClassId;
using tagsiege::Edge;
using tagsiege::NodeId;
using tagsiege::TextAttributedGraph;

inline Eigen::MatrixXd dense_adjacency(const TextAttributedGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

/// D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
inline Eigen::MatrixXd normalized_adjacency(const TextAttributedGraph& g) {
  const Eigen::MatrixXd a = dense_adjacency(g) + Eigen::MatrixXd::Identity(
                                                     static_cast<Eigen::Index>(g.node_count()),
                                                     static_cast<Eigen::Index>(g.node_count()));
  const Eigen::VectorXd deg = a.rowwise().sum();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) d(i, i) = 1.0 / std::sqrt(deg(i));
  return d * a * d;
}

/// Straight-line two-layer GCN: element loops, no Eigen products.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gcn_forward(const Eigen::MatrixXd& ahat,
                                                               const Eigen::MatrixXd& x,
                                                               const Eigen::MatrixXd& w1,
                                                               const Eigen::MatrixXd& w2) {
  const auto mul = [](const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(p.rows(), q.cols());
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      for (Eigen::Index j = 0; j < q.cols(); ++j) {
        long double acc = 0.0L;
        for (Eigen::Index k = 0; k < p.cols(); ++k) acc += static_cast<long double>(p(i, k)) * q(k, j);
        r(i, j) = static_cast<double>(acc);
      }
    }
    return r;
  };
  Eigen::MatrixXd h = mul(mul(ahat, x), w1);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = std::max(0.0, h.data()[i]);
  return {mul(mul(ahat, h), w2), h};
}

inline double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double dot = 0, na = 0, nb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    dot += a(i) * b(i);
    na += a(i) * a(i);
    nb += b(i) * b(i);
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / std::sqrt(na * nb);
}

/// Every other node sorted by descending 1 - cos, ties to the lower id.
inline std::vector<std::pair<NodeId, double>> full_dissimilarity_sort(const Eigen::MatrixXd& z,
                                                                      NodeId target) {
  std::vector<std::pair<NodeId, double>> all;
  for (Eigen::Index v = 0; v < z.rows(); ++v) {
    if (static_cast<NodeId>(v) == target) continue;
    const Eigen::VectorXd a = z.row(target).transpose();
    const Eigen::VectorXd b = z.row(v).transpose();
    const double d = (a.norm() == 0 || b.norm() == 0) ? 1.0 : 1.0 - cosine(a, b);
    all.emplace_back(static_cast<NodeId>(v), d);
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& p, const auto& q) { return p.second > q.second; });
  return all;
}

inline NodeId argmax_cosine(const Eigen::MatrixXd& z, NodeId target, const std::vector<NodeId>& pool) {
  NodeId best = pool.front();
  double best_sim = -2.0;
  for (NodeId v : pool) {
    const double s = cosine(z.row(target).transpose(), z.row(v).transpose());
    if (s > best_sim || (s == best_sim && v < best)) {
      best = v;
      best_sim = s;
    }
  }
  return best;
}

inline NodeId argmin_cosine(const Eigen::MatrixXd& z, NodeId target, const std::vector<NodeId>& pool) {
  NodeId best = pool.front();
  double best_sim = 2.0;
  for (NodeId v : pool) {
    const double s = cosine(z.row(target).transpose(), z.row(v).transpose());
    if (s < best_sim || (s == best_sim && v < best)) {
      best = v;
      best_sim = s;
    }
  }
  return best;
}

/// Number of unordered pairs in exactly one of the two edge sets.
inline std::size_t edge_set_difference(const TextAttributedGraph& a, const TextAttributedGraph& b) {
  const std::set<Edge> sa(a.edges().begin(), a.edges().end());
  const std::set<Edge> sb(b.edges().begin(), b.edges().end());
  std::size_t diff = 0;
  for (const Edge& e : sa) diff += sb.contains(e) ? 0 : 1;
  for (const Edge& e : sb) diff += sa.contains(e) ? 0 : 1;
  return diff;
}

inline std::vector<std::string> words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

/// TF-IDF cell from the formula: count * (ln((1 + N) / (1 + df)) + 1).
inline double tfidf(const std::vector<std::string>& corpus, std::size_t doc, const std::string& term) {
  std::size_t df = 0;
  for (const auto& d : corpus) {
    const auto w = words(d);
    df += std::find(w.begin(), w.end(), term) != w.end() ? 1 : 0;
  }
  const auto w = words(corpus[doc]);
  const auto count = static_cast<double>(std::count(w.begin(), w.end(), term));
  const double n = static_cast<double>(corpus.size());
  return count * (std::log((1.0 + n) / (1.0 + static_cast<double>(df))) + 1.0);
}

/// The max_size most frequent terms by total count, ties lexicographic.
inline std::vector<std::string> top_terms(const std::vector<std::string>& corpus, std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const auto& d : corpus) {
    for (const auto& w : words(d)) ++counts[w];
  }
  std::vector<std::pair<std::string, std::size_t>> all(counts.begin(), counts.end());
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (all.size() > max_size) all.resize(max_size);
  std::vector<std::string> out;
  for (auto& [t, c] : all) out.push_back(t);
  std::sort(out.begin(), out.end());
  return out;
}

inline double homophily_edge(const TextAttributedGraph& g, const Eigen::MatrixXd& x) {
  double total = 0.0;
  std::size_t count = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (NodeId v = u + 1; v < g.node_count(); ++v) {
      if (!g.has_edge(u, v)) continue;
      total += cosine(x.row(u).transpose(), x.row(v).transpose());
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

inline double homophily_node(const TextAttributedGraph& g, const Eigen::MatrixXd& x) {
  double total = 0.0;
  std::size_t counted = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    double sum = 0.0;
    std::size_t deg = 0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
      if (u == v || !g.has_edge(u, v)) continue;
      sum += cosine(x.row(u).transpose(), x.row(v).transpose());
      ++deg;
    }
    if (deg == 0) continue;
    total += sum / static_cast<double>(deg);
    ++counted;
  }
  return total / static_cast<double>(counted);
}

/// Independent check of every rewrite constraint: single-token keyword,
/// containment, >= 30% retention and the token budget.
inline bool text_edit_ok(const std::string& original, const std::string& keyword,
                         const std::string& fresh, long long budget) {
  const auto k = words(keyword);
  if (k.size() != 1) return false;
  const auto o = words(original);
  const auto f = words(fresh);
  if (std::find(f.begin(), f.end(), k[0]) == f.end()) return false;
  std::map<std::string, long> bag;
  for (const auto& w : o) ++bag[w];
  std::size_t retained = 0;
  long long added = 0;
  for (const auto& w : f) {
    if (bag[w] > 0) {
      --bag[w];
      ++retained;
    } else {
      ++added;
    }
  }
  long long removed = static_cast<long long>(o.size() - retained);
  if (added + removed > budget) return false;
  return static_cast<double>(retained) >= 0.3 * static_cast<double>(o.size());
}

}  // namespace oracle
