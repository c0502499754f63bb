#include "gcnfair/fairness.hpp"

#include <cmath>
#include <fstream>

#include "gcnfair/error.hpp"
#include "io_util.hpp"

namespace gcnfair {

namespace {

struct Accumulator {
  double sum[2] = {0.0, 0.0};
  double count[2] = {0.0, 0.0};
};

std::vector<GroupFairness> group_rows(const SubgroupView& sv) {
  std::vector<GroupFairness> rows(static_cast<std::size_t>(sv.num_groups));
  for (int g = 0; g < sv.num_groups; ++g) rows[static_cast<std::size_t>(g)].group = g;
  for (std::size_t i = 0; i < sv.group_of.size(); ++i) {
    auto& row = rows.at(static_cast<std::size_t>(sv.group_of[i]));
    (sv.t_labels[i] == 0 ? row.n_t1 : row.n_t2) += 1;
  }
  return rows;
}

void finish(FairnessAssessment& out, const std::vector<Accumulator>& acc) {
  double total = 0.0;
  out.counted_groups = 0;
  for (std::size_t g = 0; g < out.groups.size(); ++g) {
    auto& row = out.groups[g];
    const auto& a = acc[g];
    row.skipped = row.n_t1 == 0 || row.n_t2 == 0 || a.count[0] == 0.0 || a.count[1] == 0.0;
    if (row.skipped) {
      row.delta = 0.0;
      continue;
    }
    row.delta = std::abs(a.sum[0] / a.count[0] - a.sum[1] / a.count[1]);
    total += row.delta;
    ++out.counted_groups;
  }
  out.mean_delta = out.counted_groups ? total / static_cast<double>(out.counted_groups) : 0.0;
}

void check_view(const SubgroupView& sv) {
  if (sv.t_labels.size() != sv.group_of.size()) {
    throw Error(ErrorCode::missing_labels, "subgroup labels missing for fairness evaluation");
  }
}

}  // namespace

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

const char* to_string(ScoreMode mode) noexcept {
  return mode == ScoreMode::pre_activation ? "pre_activation" : "post_sigmoid";
}

const char* to_string(PairScope scope) noexcept {
  return scope == PairScope::all_pairs ? "all_pairs" : "sampled_pairs";
}

SubgroupView subgroup_view(const WithinGroupView& view, const Dataset& data) {
  if (!data.t_labels) {
    throw Error(ErrorCode::missing_labels, "dataset has no subgroup (T) labels");
  }
  return {view.group_of, *data.t_labels, view.num_groups()};
}

FairnessAssessment delta_oriented(std::span<const OrientedScore> scores, const SubgroupView& sv,
                                  ScoreMode mode) {
  check_view(sv);
  FairnessAssessment out;
  out.mode = mode;
  out.scope = PairScope::sampled_pairs;
  out.groups = group_rows(sv);
  std::vector<Accumulator> acc(out.groups.size());
  for (const auto& o : scores) {
    const int g = sv.group_of.at(o.anchor);
    if (g != sv.group_of.at(o.other)) continue;
    const double s = mode == ScoreMode::post_sigmoid ? sigmoid(o.score) : o.score;
    auto& a = acc[static_cast<std::size_t>(g)];
    const int t = sv.t_labels[o.anchor];
    a.sum[t] += s;
    a.count[t] += 1.0;
  }
  finish(out, acc);
  return out;
}

FairnessAssessment delta(std::span<const NodePair> pairs, std::span<const double> scores,
                         const SubgroupView& sv, ScoreMode mode) {
  if (pairs.size() != scores.size()) {
    throw Error(ErrorCode::dimension_mismatch, "delta: pairs and scores are not aligned");
  }
  std::vector<OrientedScore> oriented;
  oriented.reserve(2 * pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    oriented.push_back({pairs[k].u, pairs[k].v, scores[k]});
    oriented.push_back({pairs[k].v, pairs[k].u, scores[k]});
  }
  return delta_oriented(oriented, sv, mode);
}

FairnessAssessment delta_all_pairs(const Eigen::MatrixXd& representations, const SubgroupView& sv,
                                   ScoreMode mode) {
  check_view(sv);
  if (static_cast<std::size_t>(representations.rows()) != sv.group_of.size()) {
    throw Error(ErrorCode::dimension_mismatch, "delta_all_pairs: one representation per node");
  }
  FairnessAssessment out;
  out.mode = mode;
  out.scope = PairScope::all_pairs;
  out.groups = group_rows(sv);
  std::vector<std::vector<NodeId>> members(out.groups.size());
  for (std::size_t i = 0; i < sv.group_of.size(); ++i) {
    members[static_cast<std::size_t>(sv.group_of[i])].push_back(static_cast<NodeId>(i));
  }
  std::vector<Accumulator> acc(out.groups.size());
  for (std::size_t g = 0; g < members.size(); ++g) {
    for (NodeId i : members[g]) {
      const int t = sv.t_labels[i];
      for (NodeId j : members[g]) {
        if (i == j) continue;
        const double raw = representations.row(i).dot(representations.row(j));
        acc[g].sum[t] += mode == ScoreMode::post_sigmoid ? sigmoid(raw) : raw;
        acc[g].count[t] += 1.0;
      }
    }
  }
  finish(out, acc);
  return out;
}

DeltaGradient delta_with_gradient(std::span<const NodePair> pairs, std::span<const double> values,
                                  const SubgroupView& sv) {
  DeltaGradient out;
  out.assessment = delta(pairs, values, sv, ScoreMode::pre_activation);
  out.d_sum.assign(pairs.size(), 0.0);

  std::vector<Accumulator> acc(out.assessment.groups.size());
  for (const auto& p : pairs) {
    const int g = sv.group_of[p.u];
    if (g != sv.group_of[p.v]) continue;
    acc[static_cast<std::size_t>(g)].count[sv.t_labels[p.u]] += 1.0;
    acc[static_cast<std::size_t>(g)].count[sv.t_labels[p.v]] += 1.0;
  }
  // Sign of (mean_T1 - mean_T2) per group, recomputed from the same sums.
  std::vector<double> sign(acc.size(), 0.0);
  {
    std::vector<Accumulator> sums(acc.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto& p = pairs[k];
      const int g = sv.group_of[p.u];
      if (g != sv.group_of[p.v]) continue;
      sums[static_cast<std::size_t>(g)].sum[sv.t_labels[p.u]] += values[k];
      sums[static_cast<std::size_t>(g)].sum[sv.t_labels[p.v]] += values[k];
    }
    for (std::size_t g = 0; g < acc.size(); ++g) {
      if (out.assessment.groups[g].skipped) continue;
      const double diff = sums[g].sum[0] / acc[g].count[0] - sums[g].sum[1] / acc[g].count[1];
      sign[g] = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    }
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& p = pairs[k];
    const int g = sv.group_of[p.u];
    if (g != sv.group_of[p.v] || sign[static_cast<std::size_t>(g)] == 0.0) continue;
    const auto& a = acc[static_cast<std::size_t>(g)];
    double d = 0.0;
    for (NodeId anchor : {p.u, p.v}) {
      d += sv.t_labels[anchor] == 0 ? 1.0 / a.count[0] : -1.0 / a.count[1];
    }
    out.d_sum[k] = sign[static_cast<std::size_t>(g)] * d;
  }
  return out;
}

FairnessAssessment delta_hat(const WithinGroupView& view, std::span<const double> rho2,
                             std::span<const double> c1, std::span<const int> t_labels,
                             FilterKind filter) {
  const auto groups = static_cast<std::size_t>(view.num_groups());
  if (rho2.size() != groups || c1.size() != groups) {
    throw Error(ErrorCode::dimension_mismatch, "delta_hat: one rho2 and C1 per group required");
  }
  if (t_labels.size() != view.group_of.size()) {
    throw Error(ErrorCode::missing_labels, "delta_hat: subgroup labels missing");
  }
  FairnessAssessment out;
  out.mode = ScoreMode::pre_activation;
  out.scope = PairScope::all_pairs;
  out.groups.resize(groups);
  double total = 0.0;
  for (std::size_t b = 0; b < groups; ++b) {
    auto& row = out.groups[b];
    row.group = static_cast<int>(b);
    double sqrt_sum = 0.0;
    double sub_sum[2] = {0.0, 0.0};
    for (NodeId j : view.groups[b]) {
      const double s = std::sqrt(view.wg_degrees[j]);
      sqrt_sum += s;
      sub_sum[t_labels[j]] += s;
      (t_labels[j] == 0 ? row.n_t1 : row.n_t2) += 1;
    }
    if (row.n_t1 == 0 || row.n_t2 == 0) {
      row.skipped = true;
      continue;
    }
    row.disparity = sub_sum[0] / static_cast<double>(row.n_t1) -
                    sub_sum[1] / static_cast<double>(row.n_t2);
    if (filter == FilterKind::random_walk) {
      row.delta_hat = 0.0;
    } else {
      if (std::isnan(rho2[b])) {
        row.skipped = true;
        continue;
      }
      const double size = static_cast<double>(view.groups[b].size());
      row.delta_hat = std::abs(rho2[b] / size * c1[b] * c1[b] * sqrt_sum * row.disparity);
    }
    total += row.delta_hat;
    ++out.counted_groups;
  }
  out.mean_delta_hat = out.counted_groups ? total / static_cast<double>(out.counted_groups) : 0.0;
  return out;
}

void merge_delta_hat(FairnessAssessment& into, const FairnessAssessment& estimate) {
  if (into.groups.size() != estimate.groups.size()) {
    throw Error(ErrorCode::dimension_mismatch, "merge_delta_hat: group counts differ");
  }
  double total = 0.0, total_hat = 0.0;
  into.counted_groups = 0;
  for (std::size_t b = 0; b < into.groups.size(); ++b) {
    auto& row = into.groups[b];
    row.delta_hat = estimate.groups[b].delta_hat;
    row.disparity = estimate.groups[b].disparity;
    row.skipped = row.skipped || estimate.groups[b].skipped;
    if (row.skipped) continue;
    total += row.delta;
    total_hat += row.delta_hat;
    ++into.counted_groups;
  }
  const double k = static_cast<double>(into.counted_groups);
  into.mean_delta = into.counted_groups ? total / k : 0.0;
  into.mean_delta_hat = into.counted_groups ? total_hat / k : 0.0;
}

double regularizer_term(std::span<const double> deltas, double lambda_fair) {
  if (lambda_fair < 0.0) throw Error(ErrorCode::invalid_argument, "lambda_fair must be >= 0");
  if (deltas.empty() || lambda_fair == 0.0) return 0.0;
  double sum = 0.0;
  for (double d : deltas) sum += d;
  return lambda_fair / static_cast<double>(deltas.size()) * sum;
}

DecayResult decay_postprocess(std::span<const double> scores, std::span<const NodePair> pairs,
                              std::span<const double> wg_degrees, double alpha) {
  if (alpha < 0.0) throw Error(ErrorCode::invalid_argument, "decay exponent must be >= 0");
  if (scores.size() != pairs.size()) {
    throw Error(ErrorCode::dimension_mismatch, "decay_postprocess: scores/pairs not aligned");
  }
  DecayResult out;
  out.scores.assign(scores.begin(), scores.end());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double prod = wg_degrees[pairs[k].u] * wg_degrees[pairs[k].v];
    if (!(prod > 0.0)) {
      out.unscaled.push_back(k);
      continue;
    }
    out.scores[k] *= std::pow(std::sqrt(prod), -alpha);
  }
  return out;
}

void write_fairness_csv(const std::filesystem::path& path, const FairnessAssessment& a) {
  auto out = detail::open_output(path);
  out << "group_id,delta,delta_hat,disparity,n_t1,n_t2,skipped\n";
  for (const auto& g : a.groups) {
    out << g.group << ',' << detail::fmt(g.delta) << ',' << detail::fmt(g.delta_hat) << ','
        << detail::fmt(g.disparity) << ',' << g.n_t1 << ',' << g.n_t2 << ','
        << (g.skipped ? 1 : 0) << '\n';
  }
}

}  // namespace gcnfair
