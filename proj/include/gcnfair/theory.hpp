/*
 * theory.hpp
 *
 * Theoretic link-prediction scores for trained GCN encoders: the linear
 * weight-chain vectors alpha_j, the per-group feature term C1, raw scores
 * tau (degree product times C1^2 for the symmetric filter, C1^2 for the
 * random-walk filter), and per-group slope fits rho2 against trained scores.
 */
#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gcnfair/gcn.hpp"
#include "gcnfair/graph.hpp"
#include "gcnfair/metrics.hpp"
#include "gcnfair/spectral.hpp"

namespace gcnfair {

struct AlphaSet {
  Eigen::MatrixXd alpha;  // n x output_dim; row j = W_L ... W_1 x_j
  double c2 = 0.0;        // sum_k ||alpha_k||_2
};

AlphaSet alpha_vectors(const Model& model, const Eigen::MatrixXd& x);

// C1 per refined group: ||sum_k w_k alpha_k|| with w_k = sqrt(D_k)/vol
// (symmetric) or D_k/vol (random walk).
std::vector<double> group_c1(const WithinGroupView& view, const AlphaSet& alphas, FilterKind filter);

// Raw tau per pair; throws invalid_argument on a cross-group pair.
std::vector<double> raw_theoretic_scores(const WithinGroupView& view, std::span<const double> c1,
                                         FilterKind filter, std::span<const NodePair> pairs);

struct RhoEstimate {
  std::vector<double> rho2;  // NaN when skipped
  std::vector<std::size_t> pair_count;
  std::vector<bool> skipped;
};

// Through-origin least squares per group: rho2 = sum(tau y) / sum(tau^2).
// Groups with fewer than two pairs or sum(tau^2) == 0 are skipped.
RhoEstimate estimate_rho(std::span<const double> tau, std::span<const double> y,
                         std::span<const int> group_ids, int num_groups);

// E[h_i] = rho(i) * sum_j P^L_ij alpha_j.
Eigen::MatrixXd linearized_representations(const Eigen::MatrixXd& p_power, const AlphaSet& alphas,
                                           std::span<const double> rho);

// Right-hand side of the expected-score bound for a same-group pair with
// error radius zeta.
double score_bound_rhs(FilterKind filter, double zeta, double rho2, double d_i, double d_j,
                       double c1, double c2);

struct TheoryPair {
  NodePair pair;
  int group = 0;
  int label = 0;  // 1 for a positive link
  double tau_raw = 0.0;
  double tau_fitted = 0.0;
  double gcn_score = 0.0;
};

struct TheoryReport {
  FilterKind filter = FilterKind::symmetric;
  int layers = 0;
  std::vector<TheoryPair> pairs;  // same-group pairs of non-skipped groups
  std::vector<double> rho2;
  std::vector<double> c1;
  std::vector<std::size_t> pair_count;
  std::vector<int> skipped_groups;
  double c2 = 0.0;
  MetricValue nrmse;
  MetricValue pcc;
  MetricValue auc;  // over every evaluated pair, same-group or not
};

// `message_graph` carries the training edges that the encoder propagated
// over; its within-group view defines the degrees and groups.
TheoryReport build_theory_report(const Model& model, const Dataset& message_graph,
                                 std::span<const NodePair> pos, std::span<const NodePair> neg);

// CSV: group,u,v,label,tau_raw,tau_fitted,gcn_score
void write_theory_pairs_csv(const std::filesystem::path& path, const TheoryReport& report);

}  // namespace gcnfair
