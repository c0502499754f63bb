/*
 * fairness.hpp
 *
 * Within-group link-prediction fairness: the score gap Delta between links
 * anchored in subgroup T1 and links anchored in T2 inside each social group,
 * its degree-disparity estimate Delta-hat, the training regularizer built
 * on Delta, and a degree-decay post-processing of scores.
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gcnfair/graph.hpp"
#include "gcnfair/spectral.hpp"

namespace gcnfair {

enum class ScoreMode { pre_activation, post_sigmoid };
enum class PairScope { all_pairs, sampled_pairs };

const char* to_string(ScoreMode mode) noexcept;
const char* to_string(PairScope scope) noexcept;

// Group and subgroup membership per node. Group ids are refined groups.
struct SubgroupView {
  std::vector<int> group_of;
  std::vector<int> t_labels;  // 0 = T1, 1 = T2
  int num_groups = 0;
};

// Throws missing_labels when the dataset has no subgroup labels.
SubgroupView subgroup_view(const WithinGroupView& view, const Dataset& data);

struct GroupFairness {
  int group = 0;
  double delta = 0.0;
  double delta_hat = 0.0;
  double disparity = 0.0;  // E_{T1} sqrt(D) - E_{T2} sqrt(D)
  std::size_t n_t1 = 0;    // nodes of the group in T1
  std::size_t n_t2 = 0;
  bool skipped = false;    // a subgroup is empty (or has no scored links)
};

struct FairnessAssessment {
  ScoreMode mode = ScoreMode::pre_activation;
  PairScope scope = PairScope::sampled_pairs;
  std::vector<GroupFairness> groups;
  double mean_delta = 0.0;      // over non-skipped groups
  double mean_delta_hat = 0.0;  // over non-skipped groups
  std::size_t counted_groups = 0;
};

// One ordered (anchor, other) orientation of a scored pair.
struct OrientedScore {
  NodeId anchor = 0;
  NodeId other = 0;
  double score = 0.0;
};

// Delta per group from ordered orientations: |mean score anchored in T1 -
// mean score anchored in T2| over orientations whose endpoints share the
// anchor's group. post_sigmoid applies the logistic function first.
FairnessAssessment delta_oriented(std::span<const OrientedScore> scores, const SubgroupView& sv,
                                  ScoreMode mode);

// Sampled scope: every undirected pair contributes both orientations.
FairnessAssessment delta(std::span<const NodePair> pairs, std::span<const double> scores,
                         const SubgroupView& sv, ScoreMode mode);

// All-pairs scope: every ordered (i, j), i != j, within each group, scored
// by <H_i, H_j>.
FairnessAssessment delta_all_pairs(const Eigen::MatrixXd& representations, const SubgroupView& sv,
                                   ScoreMode mode);

struct DeltaGradient {
  FairnessAssessment assessment;
  // d(sum of non-skipped Delta) / d(value_k) for each supplied pair value.
  std::vector<double> d_sum;
};

// Sampled-scope Delta on already-transformed values (no sigmoid applied)
// together with its derivative; the subgradient of |x| at 0 is taken as 0.
DeltaGradient delta_with_gradient(std::span<const NodePair> pairs, std::span<const double> values,
                                  const SubgroupView& sv);

// Closed-form estimate. Symmetric filter:
//   |rho2 / |S| * C1^2 * sum_j sqrt(D_jj) * (E_T1 sqrt(D) - E_T2 sqrt(D))|
// Random-walk filter: 0. Groups whose rho2 is NaN are skipped.
FairnessAssessment delta_hat(const WithinGroupView& view, std::span<const double> rho2,
                             std::span<const double> c1, std::span<const int> t_labels,
                             FilterKind filter);

// Copies delta_hat and disparity from `estimate` into `into` and recomputes
// skip flags and means over groups present in both.
void merge_delta_hat(FairnessAssessment& into, const FairnessAssessment& estimate);

// (lambda / B) * sum of the given per-group Delta values, B = values.size().
double regularizer_term(std::span<const double> deltas, double lambda_fair);

struct DecayResult {
  std::vector<double> scores;
  std::vector<std::size_t> unscaled;  // pairs with a zero degree product
};

// score * (sqrt(D_ii D_jj))^(-alpha); alpha < 0 is rejected.
DecayResult decay_postprocess(std::span<const double> scores, std::span<const NodePair> pairs,
                              std::span<const double> wg_degrees, double alpha);

// CSV: group_id,delta,delta_hat,disparity,n_t1,n_t2,skipped
void write_fairness_csv(const std::filesystem::path& path, const FairnessAssessment& a);

double sigmoid(double x) noexcept;

}  // namespace gcnfair
