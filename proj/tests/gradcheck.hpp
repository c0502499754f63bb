// Central finite-difference check of loss_and_gradients.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gcnfair/gcn.hpp"
#include "support.hpp"

namespace testsupport {

struct GradCheck {
  double max_relative_error = 0.0;
  std::size_t entries = 0;
  // Entries whose +-h probes flip a ReLU; the loss is not differentiable
  // inside that stencil, so they are left out of max_relative_error.
  std::size_t kink_crossings = 0;
};

// Signs of every hidden pre-activation, recomputed densely.
inline std::vector<bool> relu_pattern(const gcnfair::Model& model, const Eigen::MatrixXd& p,
                                      const Eigen::MatrixXd& x) {
  std::vector<bool> out;
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l + 1 < model.weights.size(); ++l) {
    const Eigen::MatrixXd z = p * h * model.weights[l].transpose();
    for (Eigen::Index k = 0; k < z.size(); ++k) out.push_back(z.data()[k] > 0.0);
    h = z.cwiseMax(0.0);
  }
  return out;
}

// Relative error per entry is |a - f| / max(|a|, |f|, floor).
inline GradCheck check_gradients(const gcnfair::Model& model, const gcnfair::NormalizedMatrix& p,
                                 const Eigen::MatrixXd& x, const std::vector<NodePair>& pos,
                                 const std::vector<NodePair>& neg, double lambda,
                                 const gcnfair::SubgroupView* sv, double h = 1e-5,
                                 double floor = 1e-7) {
  const auto analytic = gcnfair::loss_and_gradients(model, p, x, pos, neg, lambda, sv);
  GradCheck out;
  gcnfair::Model probe = model;
  const Eigen::MatrixXd dense_p = p.matrix.to_dense();
  const bool relu = !model.identity_activations;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    for (Eigen::Index k = 0; k < model.weights[l].size(); ++k) {
      const double w0 = model.weights[l].data()[k];
      probe.weights[l].data()[k] = w0 + h;
      const double up = gcnfair::loss_and_gradients(probe, p, x, pos, neg, lambda, sv).loss;
      const auto up_signs = relu ? relu_pattern(probe, dense_p, x) : std::vector<bool>{};
      probe.weights[l].data()[k] = w0 - h;
      const double down = gcnfair::loss_and_gradients(probe, p, x, pos, neg, lambda, sv).loss;
      const auto down_signs = relu ? relu_pattern(probe, dense_p, x) : std::vector<bool>{};
      probe.weights[l].data()[k] = w0;
      ++out.entries;
      if (up_signs != down_signs) {
        ++out.kink_crossings;
        continue;
      }
      const double fd = (up - down) / (2 * h);
      const double a = analytic.gradients[l].data()[k];
      const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), floor});
      out.max_relative_error = std::max(out.max_relative_error, rel);
    }
  }
  return out;
}

struct GradInstance {
  gcnfair::Dataset data;
  gcnfair::Model model;
  std::vector<NodePair> pos, neg;
};

// Small random graph with sampled positive edges and non-edges.
inline GradInstance gradient_instance(std::size_t n, int layers, gcnfair::FilterKind filter,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GradInstance g;
  g.data = planted_partition(n, 2, 0.5, 0.15, rng, 3);
  std::vector<int> dims(static_cast<std::size_t>(layers), 4);
  dims.back() = 3;
  g.model = gcnfair::init_model(3, dims, filter, seed);
  g.pos = g.data.edges;
  g.neg = gcnfair::sample_negatives(g.data, std::min<std::size_t>(g.pos.size(), 6), seed + 1);
  return g;
}

}  // namespace testsupport
