/*
 * spectral.hpp
 *
 * Normalized adjacency operators P (full graph) and P-hat (within-group),
 * per-group spectra of P-hat, and the entrywise error radii that bound how
 * far P^L sits from its degree-determined limit inside each group.
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gcnfair/graph.hpp"
#include "gcnfair/sparse.hpp"

namespace gcnfair {

enum class FilterKind { symmetric, random_walk };

// Accepts "sym"/"symmetric" and "rw"/"random_walk".
FilterKind parse_filter(const std::string& name);
const char* to_string(FilterKind kind) noexcept;
const char* short_name(FilterKind kind) noexcept;

struct NormalizedMatrix {
  FilterKind kind = FilterKind::symmetric;
  CsrMatrix matrix;
  // Nodes whose degree is zero; their rows (and columns) are all zero.
  std::vector<NodeId> zero_degree_nodes;

  std::size_t n() const noexcept { return matrix.rows(); }
};

// Normalizes A + w*I (w = self-loop weight) by the matching degrees:
// D^{-1/2} A D^{-1/2} for the symmetric kind, D^{-1} A for random walk.
NormalizedMatrix normalized_adjacency(std::size_t n, const std::vector<NodePair>& edges,
                                      double self_loop_weight, FilterKind kind);

// P over all edges of the dataset.
NormalizedMatrix normalized_matrix(const Dataset& data, FilterKind kind);
// P-hat over the within-group edges (block diagonal in the refined groups).
NormalizedMatrix normalized_matrix(const Dataset& data, const WithinGroupView& view,
                                   FilterKind kind);

struct SpectralOptions {
  std::size_t dense_limit = 4096;
  double tolerance = 1e-8;
  int max_iterations = 10000;
  bool keep_eigenvectors = false;
};

struct BlockSpectrum {
  int group = 0;
  std::size_t size = 0;
  // Non-increasing. Full list for dense blocks; {lambda_1, lambda_2,
  // lambda_min} for blocks solved iteratively.
  std::vector<double> eigenvalues;
  bool full_spectrum = true;
  double lambda_2 = 0.0;
  double lambda_min = 0.0;
  double gap = 0.0;  // max(lambda_2, |lambda_min|); 0 for singleton blocks
  double volume = 0.0;
  // Single node without within-group edges or self-loop weight.
  bool degenerate = false;
  std::optional<Eigen::MatrixXd> eigenvectors;  // columns, dense blocks only
};

struct SpectralSummary {
  std::vector<BlockSpectrum> blocks;  // indexed by refined group id
};

// Eigen-decomposes every refined block of P-hat. Random-walk blocks are
// mapped to D^{1/2} P D^{-1/2}, which is symmetric with the same spectrum.
// Blocks are independent; results do not depend on evaluation order.
SpectralSummary block_spectrum(const NormalizedMatrix& phat, const WithinGroupView& view,
                               const SpectralOptions& options = {});

// Largest singular value.
double operator_norm(const CsrMatrix& m, const SpectralOptions& options = {});

struct BoundSet {
  FilterKind kind = FilterKind::symmetric;
  int layers = 1;
  double xi_norm = 0.0;    // ||P - P-hat||_op
  double phat_norm = 0.0;  // ||P-hat||_op
  // sum_{l=1..L} C(L,l) xi_norm^l phat_norm^(L-l); bounds cross-group entries.
  double residual_term = 0.0;
  // max_{u,v} sqrt(D-hat_vv / D-hat_uu) over nodes with D-hat > 0.
  double degree_ratio = 1.0;
  std::vector<double> zeta_s;  // per refined group
  std::vector<double> zeta_r;  // per refined group
  std::optional<double> c2;    // sum_k ||alpha_k||_2 when weights are known

  // zeta_s for the symmetric kind, zeta_r for random walk.
  double zeta(int group) const;
};

BoundSet residual_and_bounds(const NormalizedMatrix& p, const NormalizedMatrix& phat,
                             const SpectralSummary& spectrum, int layers,
                             const WithinGroupView& view,
                             const SpectralOptions& options = {});

// sum_{l=1..L} C(L,l) a^l b^(L-l)
double binomial_residual(double xi_norm, double phat_norm, int layers);

inline constexpr std::size_t kDensePowerLimit = 5000;

// P^L by repeated dense multiplication (verification oracle).
Eigen::MatrixXd dense_power_entries(const NormalizedMatrix& p, int layers);
Eigen::MatrixXd dense_power_entries(const Eigen::MatrixXd& p, int layers);

// Degree-determined limit of P^L_ij for same-group i, j: sqrt(D_i D_j)/vol
// (symmetric) or D_j/vol (random walk); 0 across groups.
double stationary_target(const WithinGroupView& view, FilterKind kind, NodeId i, NodeId j);

// CSV: group_id,size,lambda_gap,volume,zeta_s,zeta_r,xi_norm
void write_bounds_csv(const std::filesystem::path& path, const SpectralSummary& spectrum,
                      const BoundSet& bounds);

}  // namespace gcnfair
