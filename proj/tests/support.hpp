// Shared fixtures and dense reference computations for the test suites.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "gcnfair/graph.hpp"

namespace testsupport {

using gcnfair::Dataset;
using gcnfair::NodeId;
using gcnfair::NodePair;

// Dense adjacency with `w` on the diagonal.
inline Eigen::MatrixXd dense_adjacency(std::size_t n, const std::vector<NodePair>& edges, double w) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) a(i, i) = w;
  for (const auto& e : edges) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

inline Eigen::MatrixXd dense_sym(const Eigen::MatrixXd& a) {
  const Eigen::VectorXd d = a.rowwise().sum();
  Eigen::VectorXd s(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) s(i) = d(i) > 0 ? 1.0 / std::sqrt(d(i)) : 0.0;
  return s.asDiagonal() * a * s.asDiagonal();
}

inline Eigen::MatrixXd dense_rw(const Eigen::MatrixXd& a) {
  const Eigen::VectorXd d = a.rowwise().sum();
  Eigen::VectorXd s(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) s(i) = d(i) > 0 ? 1.0 / d(i) : 0.0;
  return s.asDiagonal() * a;
}

inline Eigen::MatrixXd power(const Eigen::MatrixXd& p, int l) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(p.rows(), p.cols());
  for (int k = 0; k < l; ++k) out = out * p;
  return out;
}

// Groups of consecutive nodes; every group gets a random spanning path so it
// stays connected, plus Bernoulli intra/inter edges.
inline Dataset planted_partition(std::size_t n, int groups, double p_in, double p_out,
                                 std::mt19937_64& rng, std::size_t feature_dim = 3,
                                 double self_loop = 1.0, bool with_t = true) {
  std::vector<int> s(n), t(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<int>(i * static_cast<std::size_t>(groups) / n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::set<NodePair> edges;
  for (int b = 0; b < groups; ++b) {
    std::vector<NodeId> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (s[i] == b) members.push_back(static_cast<NodeId>(i));
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t k = 1; k < members.size(); ++k) {
      edges.insert(gcnfair::canonical(members[k - 1], members[k]));
    }
    for (std::size_t k = 0; k < members.size(); ++k) t[members[k]] = k % 2 == 0 ? 0 : 1;
  }
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (unif(rng) < (s[u] == s[v] ? p_in : p_out)) edges.insert({u, v});
    }
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_dim));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  std::optional<std::vector<int>> tl;
  if (with_t) tl = t;
  return gcnfair::make_dataset(n, {edges.begin(), edges.end()}, x, s, tl, self_loop);
}

// Six-node fixture: CS = {0..4}, Edu = {5}; node 3 is the one man in CS.
inline Dataset toy_cs(double self_loop = 0.0) {
  std::vector<NodePair> edges{{0, 3}, {2, 3}, {1, 3}, {1, 4}};
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(6, 6);
  return gcnfair::make_dataset(6, edges, x, {0, 0, 0, 0, 0, 1}, std::vector<int>{1, 1, 1, 0, 1, 1},
                               self_loop);
}

}  // namespace testsupport
