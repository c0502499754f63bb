#include "gcnfair/theory.hpp"

#include <cmath>
#include <limits>

#include "gcnfair/error.hpp"
#include "io_util.hpp"

namespace gcnfair {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

AlphaSet alpha_vectors(const Model& model, const Eigen::MatrixXd& x) {
  if (model.weights.empty()) throw Error(ErrorCode::invalid_argument, "model has no layers");
  if (static_cast<std::size_t>(x.cols()) != model.input_dim()) {
    throw Error(ErrorCode::dimension_mismatch, "feature dim does not match model input dim");
  }
  AlphaSet out;
  out.alpha = x;
  for (const auto& w : model.weights) out.alpha = (out.alpha * w.transpose()).eval();
  for (Eigen::Index k = 0; k < out.alpha.rows(); ++k) out.c2 += out.alpha.row(k).norm();
  return out;
}

std::vector<double> group_c1(const WithinGroupView& view, const AlphaSet& alphas,
                             FilterKind filter) {
  if (static_cast<std::size_t>(alphas.alpha.rows()) != view.group_of.size()) {
    throw Error(ErrorCode::dimension_mismatch, "alpha rows do not match the node count");
  }
  std::vector<double> out(view.groups.size(), 0.0);
  for (std::size_t b = 0; b < view.groups.size(); ++b) {
    const double vol = view.volumes[b];
    if (!(vol > 0.0)) continue;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(alphas.alpha.cols());
    for (NodeId k : view.groups[b]) {
      const double d = view.wg_degrees[k];
      const double w = filter == FilterKind::symmetric ? std::sqrt(d) / vol : d / vol;
      acc += w * alphas.alpha.row(k).transpose();
    }
    out[b] = acc.norm();
  }
  return out;
}

std::vector<double> raw_theoretic_scores(const WithinGroupView& view, std::span<const double> c1,
                                         FilterKind filter, std::span<const NodePair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    const int b = view.group_of.at(p.u);
    if (view.group_of.at(p.v) != b) {
      throw Error(ErrorCode::invalid_argument,
                  "pair (" + std::to_string(p.u) + ", " + std::to_string(p.v) +
                      ") crosses groups; the theoretic score is undefined there");
    }
    const double c = c1[static_cast<std::size_t>(b)];
    if (filter == FilterKind::symmetric) {
      out.push_back(std::sqrt(view.wg_degrees[p.u] * view.wg_degrees[p.v]) * c * c);
    } else {
      out.push_back(c * c);
    }
  }
  return out;
}

RhoEstimate estimate_rho(std::span<const double> tau, std::span<const double> y,
                         std::span<const int> group_ids, int num_groups) {
  if (tau.size() != y.size() || tau.size() != group_ids.size()) {
    throw Error(ErrorCode::dimension_mismatch, "estimate_rho: arrays are not aligned");
  }
  const auto g = static_cast<std::size_t>(num_groups);
  std::vector<double> ty(g, 0.0), tt(g, 0.0);
  RhoEstimate out;
  out.pair_count.assign(g, 0);
  for (std::size_t k = 0; k < tau.size(); ++k) {
    const auto b = static_cast<std::size_t>(group_ids[k]);
    if (b >= g) throw Error(ErrorCode::out_of_range, "estimate_rho: group id out of range");
    ty[b] += tau[k] * y[k];
    tt[b] += tau[k] * tau[k];
    ++out.pair_count[b];
  }
  out.rho2.assign(g, kNaN);
  out.skipped.assign(g, true);
  for (std::size_t b = 0; b < g; ++b) {
    if (out.pair_count[b] < 2 || !(tt[b] > 0.0)) continue;
    out.rho2[b] = ty[b] / tt[b];
    out.skipped[b] = false;
  }
  return out;
}

Eigen::MatrixXd linearized_representations(const Eigen::MatrixXd& p_power, const AlphaSet& alphas,
                                           std::span<const double> rho) {
  if (p_power.rows() != p_power.cols() || p_power.cols() != alphas.alpha.rows() ||
      static_cast<std::size_t>(p_power.rows()) != rho.size()) {
    throw Error(ErrorCode::dimension_mismatch, "linearized_representations: shape mismatch");
  }
  Eigen::MatrixXd out = p_power * alphas.alpha;
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) *= rho[static_cast<std::size_t>(i)];
  return out;
}

double score_bound_rhs(FilterKind filter, double zeta, double rho2, double d_i, double d_j,
                       double c1, double c2) {
  const double lead = filter == FilterKind::symmetric ? std::sqrt(d_i) + std::sqrt(d_j) : 1.0;
  return zeta * rho2 * lead * c1 * c2 + zeta * zeta * rho2 * c2 * c2;
}

TheoryReport build_theory_report(const Model& model, const Dataset& message_graph,
                                 std::span<const NodePair> pos, std::span<const NodePair> neg) {
  const WithinGroupView view = within_group_structure(message_graph);
  const NormalizedMatrix p = normalized_matrix(message_graph, model.filter);
  const Eigen::MatrixXd h = forward(model, p, message_graph.features);
  const AlphaSet alphas = alpha_vectors(model, message_graph.features);

  TheoryReport report;
  report.filter = model.filter;
  report.layers = model.layers();
  report.c1 = group_c1(view, alphas, model.filter);
  report.c2 = alphas.c2;

  const auto sp = score_pairs(h, pos);
  const auto sn = score_pairs(h, neg);
  report.auc = roc_auc(sp, sn);

  std::vector<TheoryPair> same;
  auto collect = [&](std::span<const NodePair> pairs, std::span<const double> scores, int label) {
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto& pr = pairs[k];
      const int b = view.group_of[pr.u];
      if (view.group_of[pr.v] != b) continue;
      TheoryPair tp;
      tp.pair = pr;
      tp.group = b;
      tp.label = label;
      tp.gcn_score = scores[k];
      same.push_back(tp);
    }
  };
  collect(pos, sp, 1);
  collect(neg, sn, 0);

  std::vector<NodePair> pairs;
  std::vector<double> y;
  std::vector<int> groups;
  for (const auto& tp : same) {
    pairs.push_back(tp.pair);
    y.push_back(tp.gcn_score);
    groups.push_back(tp.group);
  }
  const auto tau = raw_theoretic_scores(view, report.c1, model.filter, pairs);
  const RhoEstimate rho = estimate_rho(tau, y, groups, view.num_groups());
  report.rho2 = rho.rho2;
  report.pair_count = rho.pair_count;
  for (int b = 0; b < view.num_groups(); ++b) {
    if (rho.skipped[static_cast<std::size_t>(b)]) report.skipped_groups.push_back(b);
  }

  std::vector<double> fitted, trained;
  for (std::size_t k = 0; k < same.size(); ++k) {
    const auto b = static_cast<std::size_t>(same[k].group);
    if (rho.skipped[b]) continue;
    TheoryPair tp = same[k];
    tp.tau_raw = tau[k];
    tp.tau_fitted = rho.rho2[b] * tau[k];
    report.pairs.push_back(tp);
    fitted.push_back(tp.tau_fitted);
    trained.push_back(tp.gcn_score);
  }
  if (report.pairs.size() < 2) {
    throw Error(ErrorCode::degenerate, "every group was skipped; no theoretic scores to compare");
  }
  report.nrmse = nrmse(fitted, trained);
  report.pcc = pcc(fitted, trained);
  return report;
}

void write_theory_pairs_csv(const std::filesystem::path& path, const TheoryReport& report) {
  auto out = detail::open_output(path);
  out << "group,u,v,label,tau_raw,tau_fitted,gcn_score\n";
  for (const auto& tp : report.pairs) {
    out << tp.group << ',' << tp.pair.u << ',' << tp.pair.v << ',' << tp.label << ','
        << detail::fmt(tp.tau_raw) << ',' << detail::fmt(tp.tau_fitted) << ','
        << detail::fmt(tp.gcn_score) << '\n';
  }
}

}  // namespace gcnfair
