#include "gcnfair/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "gcnfair/error.hpp"
#include "io_util.hpp"

namespace gcnfair {

FilterKind parse_filter(const std::string& name) {
  if (name == "sym" || name == "symmetric") return FilterKind::symmetric;
  if (name == "rw" || name == "random_walk") return FilterKind::random_walk;
  throw Error(ErrorCode::invalid_argument, "unknown filter kind '" + name + "'");
}

const char* to_string(FilterKind kind) noexcept {
  return kind == FilterKind::symmetric ? "symmetric" : "random_walk";
}

const char* short_name(FilterKind kind) noexcept {
  return kind == FilterKind::symmetric ? "sym" : "rw";
}

NormalizedMatrix normalized_adjacency(std::size_t n, const std::vector<NodePair>& edges,
                                      double self_loop_weight, FilterKind kind) {
  std::vector<double> deg(n, self_loop_weight);
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n) throw Error(ErrorCode::out_of_range, "edge endpoint >= n");
    deg[e.u] += 1.0;
    deg[e.v] += 1.0;
  }
  auto weight = [&](std::size_t i, std::size_t j, double a) {
    return kind == FilterKind::symmetric ? a / std::sqrt(deg[i] * deg[j]) : a / deg[i];
  };

  NormalizedMatrix out;
  out.kind = kind;
  std::vector<CsrMatrix::Triplet> t;
  t.reserve(2 * edges.size() + n);
  for (std::size_t i = 0; i < n; ++i) {
    if (deg[i] <= 0.0) {
      out.zero_degree_nodes.push_back(static_cast<NodeId>(i));
    } else if (self_loop_weight > 0.0) {
      t.push_back({i, i, weight(i, i, self_loop_weight)});
    }
  }
  for (const auto& e : edges) {
    if (e.u == e.v) continue;
    t.push_back({e.u, e.v, weight(e.u, e.v, 1.0)});
    t.push_back({e.v, e.u, weight(e.v, e.u, 1.0)});
  }
  out.matrix = CsrMatrix::from_triplets(n, n, std::move(t));
  return out;
}

NormalizedMatrix normalized_matrix(const Dataset& data, FilterKind kind) {
  return normalized_adjacency(data.n, data.edges, data.self_loop_weight, kind);
}

NormalizedMatrix normalized_matrix(const Dataset& data, const WithinGroupView& view,
                                   FilterKind kind) {
  return normalized_adjacency(data.n, view.wg_edges, data.self_loop_weight, kind);
}

namespace {

// Symmetric operator of a block: the block itself for the symmetric kind,
// D^{1/2} P D^{-1/2} = D^{-1/2} A D^{-1/2} for random walk.
CsrMatrix symmetric_block(const NormalizedMatrix& phat, const std::vector<std::size_t>& index,
                          const std::vector<double>& wg_degrees) {
  CsrMatrix block = phat.matrix.principal_submatrix(index);
  if (phat.kind == FilterKind::symmetric) return block;
  std::vector<CsrMatrix::Triplet> t;
  t.reserve(block.nnz());
  for (std::size_t r = 0; r < block.rows(); ++r) {
    for (std::size_t k = block.row_ptr()[r]; k < block.row_ptr()[r + 1]; ++k) {
      const std::size_t c = block.col_idx()[k];
      const double scale = std::sqrt(wg_degrees[index[r]] / wg_degrees[index[c]]);
      t.push_back({r, c, block.values()[k] * scale});
    }
  }
  return CsrMatrix::from_triplets(block.rows(), block.cols(), std::move(t));
}

Eigen::VectorXd start_vector(std::size_t size, unsigned seed) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL ^ seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd x(static_cast<Eigen::Index>(size));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = unif(rng);
  return x.normalized();
}

// Largest eigenvalue of shift*I + sign*S restricted to the complement of
// `deflate` (unit vector), by power iteration. S must be symmetric and the
// shifted operator positive semidefinite.
double shifted_power(const CsrMatrix& s, double shift, double sign,
                     const Eigen::VectorXd& deflate, const SpectralOptions& opt, int group,
                     const char* what) {
  Eigen::VectorXd x = start_vector(s.rows(), static_cast<unsigned>(group) * 2654435761u);
  x -= deflate.dot(x) * deflate;
  x.normalize();
  for (int it = 0; it < opt.max_iterations; ++it) {
    Eigen::VectorXd y = shift * x + sign * s.multiply(x);
    y -= deflate.dot(y) * deflate;
    const double mu = x.dot(y);
    // For a symmetric operator the residual norm bounds the eigenvalue error.
    if ((y - mu * x).norm() <= opt.tolerance) return mu;
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    x = y / norm;
  }
  throw Error(ErrorCode::no_convergence,
              std::string("eigensolver did not converge for ") + what + " of group " +
                  std::to_string(group));
}

}  // namespace

SpectralSummary block_spectrum(const NormalizedMatrix& phat, const WithinGroupView& view,
                               const SpectralOptions& options) {
  if (phat.n() != view.group_of.size()) {
    throw Error(ErrorCode::dimension_mismatch, "block_spectrum: matrix/view size mismatch");
  }
  SpectralSummary summary;
  summary.blocks.resize(view.groups.size());
  for (std::size_t b = 0; b < view.groups.size(); ++b) {
    const auto& members = view.groups[b];
    BlockSpectrum& out = summary.blocks[b];
    out.group = static_cast<int>(b);
    out.size = members.size();
    out.volume = view.volumes[b];

    if (members.size() == 1) {
      const double value = phat.matrix.coeff(members[0], members[0]);
      out.eigenvalues = {value};
      out.lambda_2 = 0.0;
      out.lambda_min = value;
      out.gap = 0.0;
      out.degenerate = view.wg_degrees[members[0]] <= 0.0;
      if (options.keep_eigenvectors) out.eigenvectors = Eigen::MatrixXd::Ones(1, 1);
      continue;
    }

    std::vector<std::size_t> index(members.begin(), members.end());
    const CsrMatrix block = symmetric_block(phat, index, view.wg_degrees);

    if (members.size() <= options.dense_limit) {
      Eigen::MatrixXd dense = block.to_dense();
      dense = 0.5 * (dense + dense.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
          dense, options.keep_eigenvectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
      if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::no_convergence,
                    "dense eigensolver failed for group " + std::to_string(b));
      }
      const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
      const Eigen::Index m = ev.size();
      out.eigenvalues.resize(static_cast<std::size_t>(m));
      for (Eigen::Index k = 0; k < m; ++k) out.eigenvalues[k] = ev[m - 1 - k];
      out.full_spectrum = true;
      out.lambda_2 = out.eigenvalues[1];
      out.lambda_min = out.eigenvalues.back();
      if (options.keep_eigenvectors) out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    } else {
      // Top eigenvector of the symmetric block is sqrt(D-hat)/sqrt(vol).
      Eigen::VectorXd top(static_cast<Eigen::Index>(members.size()));
      for (std::size_t i = 0; i < members.size(); ++i) {
        top[static_cast<Eigen::Index>(i)] = std::sqrt(view.wg_degrees[members[i]]);
      }
      top.normalize();
      const double l2 = shifted_power(block, 1.0, 1.0, top, options, static_cast<int>(b),
                                      "lambda_2") - 1.0;
      const double lmin = 1.0 - shifted_power(block, 1.0, -1.0, top, options,
                                              static_cast<int>(b), "lambda_min");
      out.full_spectrum = false;
      out.eigenvalues = {1.0, l2, lmin};
      out.lambda_2 = l2;
      out.lambda_min = lmin;
    }
    out.gap = std::clamp(std::max(out.lambda_2, std::abs(out.lambda_min)), 0.0, 1.0);
  }
  return summary;
}

namespace {

double operator_norm_impl(const CsrMatrix& m, const SpectralOptions& options, bool symmetric) {
  if (m.rows() == 0 || m.cols() == 0 || m.nnz() == 0) return 0.0;
  if (m.rows() <= options.dense_limit && m.cols() <= options.dense_limit) {
    const Eigen::MatrixXd dense = m.to_dense();
    if (symmetric) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
      return solver.eigenvalues().cwiseAbs().maxCoeff();
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
    return svd.singularValues()[0];
  }
  // Power iteration on M^T M.
  Eigen::VectorXd x = start_vector(m.cols(), 17u);
  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::VectorXd y = m.multiply_transpose(m.multiply(x));
    const double sigma2 = x.dot(y);
    if ((y - sigma2 * x).norm() <= options.tolerance * std::max(1.0, sigma2)) {
      return std::sqrt(std::max(sigma2, 0.0));
    }
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    x = y / norm;
  }
  throw Error(ErrorCode::no_convergence, "operator norm power iteration did not converge");
}

bool is_symmetric(const CsrMatrix& m) {
  if (m.rows() != m.cols()) return false;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k) {
      if (std::abs(m.values()[k] - m.coeff(m.col_idx()[k], r)) > 1e-12) return false;
    }
  }
  return true;
}

}  // namespace

double operator_norm(const CsrMatrix& m, const SpectralOptions& options) {
  return operator_norm_impl(m, options, is_symmetric(m));
}

double binomial_residual(double xi_norm, double phat_norm, int layers) {
  double sum = 0.0;
  double binom = 1.0;
  for (int l = 1; l <= layers; ++l) {
    binom = binom * static_cast<double>(layers - l + 1) / static_cast<double>(l);
    sum += binom * std::pow(xi_norm, l) * std::pow(phat_norm, layers - l);
  }
  return sum;
}

double BoundSet::zeta(int group) const {
  const auto& z = kind == FilterKind::symmetric ? zeta_s : zeta_r;
  return z.at(static_cast<std::size_t>(group));
}

BoundSet residual_and_bounds(const NormalizedMatrix& p, const NormalizedMatrix& phat,
                             const SpectralSummary& spectrum, int layers,
                             const WithinGroupView& view, const SpectralOptions& options) {
  if (layers < 1) throw Error(ErrorCode::invalid_argument, "layer count must be >= 1");
  if (p.n() != phat.n()) {
    throw Error(ErrorCode::dimension_mismatch, "P and P-hat differ in dimension");
  }
  if (p.kind != phat.kind) {
    throw Error(ErrorCode::invalid_argument, "P and P-hat use different normalizations");
  }
  if (spectrum.blocks.size() != view.groups.size()) {
    throw Error(ErrorCode::dimension_mismatch, "spectrum does not match the group view");
  }

  BoundSet out;
  out.kind = p.kind;
  out.layers = layers;

  double dmax = 0.0;
  double dmin = 0.0;
  bool any_positive = false;
  for (double d : view.wg_degrees) {
    if (d <= 0.0) continue;
    dmin = any_positive ? std::min(dmin, d) : d;
    dmax = std::max(dmax, d);
    any_positive = true;
  }
  if (!any_positive) {
    throw Error(ErrorCode::degenerate, "all within-group degrees are zero; degree ratio undefined");
  }
  out.degree_ratio = std::sqrt(dmax / dmin);

  const bool sym = p.kind == FilterKind::symmetric;
  out.xi_norm = operator_norm_impl(subtract(p.matrix, phat.matrix), options, sym);

  // P-hat is block diagonal, so its norm is the largest block norm.
  double phat_norm = 0.0;
  for (std::size_t b = 0; b < view.groups.size(); ++b) {
    const auto& blk = spectrum.blocks[b];
    if (sym) {
      phat_norm = std::max({phat_norm, std::abs(blk.eigenvalues.front()), std::abs(blk.lambda_min)});
    } else {
      std::vector<std::size_t> index(view.groups[b].begin(), view.groups[b].end());
      phat_norm = std::max(phat_norm,
                           operator_norm_impl(phat.matrix.principal_submatrix(index), options,
                                              index.size() == 1));
    }
  }
  out.phat_norm = phat_norm;
  out.residual_term = binomial_residual(out.xi_norm, out.phat_norm, layers);

  out.zeta_s.resize(view.groups.size());
  out.zeta_r.resize(view.groups.size());
  for (std::size_t b = 0; b < view.groups.size(); ++b) {
    const double decay = std::pow(spectrum.blocks[b].gap, layers);
    out.zeta_s[b] = decay + out.residual_term;
    out.zeta_r[b] = out.degree_ratio * decay + out.residual_term;
  }
  return out;
}

Eigen::MatrixXd dense_power_entries(const Eigen::MatrixXd& p, int layers) {
  if (layers < 1) throw Error(ErrorCode::invalid_argument, "power must be >= 1");
  if (static_cast<std::size_t>(p.rows()) > kDensePowerLimit) {
    throw Error(ErrorCode::size_guard,
                "dense power refused for n = " + std::to_string(p.rows()) + " > " +
                    std::to_string(kDensePowerLimit));
  }
  Eigen::MatrixXd out = p;
  for (int l = 1; l < layers; ++l) out = (out * p).eval();
  return out;
}

Eigen::MatrixXd dense_power_entries(const NormalizedMatrix& p, int layers) {
  if (p.n() > kDensePowerLimit) {
    throw Error(ErrorCode::size_guard,
                "dense power refused for n = " + std::to_string(p.n()) + " > " +
                    std::to_string(kDensePowerLimit));
  }
  return dense_power_entries(p.matrix.to_dense(), layers);
}

double stationary_target(const WithinGroupView& view, FilterKind kind, NodeId i, NodeId j) {
  const int g = view.group_of.at(i);
  if (g != view.group_of.at(j)) return 0.0;
  const double vol = view.volumes[static_cast<std::size_t>(g)];
  if (vol <= 0.0) return 0.0;
  if (kind == FilterKind::symmetric) return std::sqrt(view.wg_degrees[i] * view.wg_degrees[j]) / vol;
  return view.wg_degrees[j] / vol;
}

void write_bounds_csv(const std::filesystem::path& path, const SpectralSummary& spectrum,
                      const BoundSet& bounds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << "group_id,size,lambda_gap,volume,zeta_s,zeta_r,xi_norm\n";
  for (std::size_t b = 0; b < spectrum.blocks.size(); ++b) {
    const auto& blk = spectrum.blocks[b];
    out << b << ',' << blk.size << ',' << detail::fmt(blk.gap) << ',' << detail::fmt(blk.volume)
        << ',' << detail::fmt(bounds.zeta_s.at(b)) << ',' << detail::fmt(bounds.zeta_r.at(b))
        << ',' << detail::fmt(bounds.xi_norm) << '\n';
  }
}

}  // namespace gcnfair
