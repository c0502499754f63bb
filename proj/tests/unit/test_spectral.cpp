#include <cmath>
#include <random>

#include "doctest.h"
#include "gcnfair/error.hpp"
#include "gcnfair/sparse.hpp"
#include "gcnfair/spectral.hpp"
#include "support.hpp"

using namespace gcnfair;

namespace {

Dataset complete(std::size_t n, double w = 0.0) {
  std::vector<NodePair> e;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) e.push_back({u, v});
  }
  return make_dataset(n, e, Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), 1),
                      std::vector<int>(n, 0), std::nullopt, w);
}

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("CSR kernels match dense products") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<CsrMatrix::Triplet> t;
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(7, 5);
  for (int k = 0; k < 20; ++k) {
    const std::size_t r = rng() % 7, c = rng() % 5;
    const double v = u(rng);
    t.push_back({r, c, v});
    dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += v;
  }
  const CsrMatrix m = CsrMatrix::from_triplets(7, 5, t);
  CHECK(max_abs_diff(m.to_dense(), dense) < 1e-15);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 3);
  const Eigen::MatrixXd y = Eigen::MatrixXd::Random(7, 3);
  CHECK(max_abs_diff(m.multiply(x), dense * x) < 1e-12);
  CHECK(max_abs_diff(m.multiply_transpose(y), dense.transpose() * y) < 1e-12);
  CHECK(max_abs_diff(m.transpose().to_dense(), dense.transpose()) < 1e-15);
  CHECK(max_abs_diff(subtract(m, m).to_dense(), Eigen::MatrixXd::Zero(7, 5)) == 0.0);
}

TEST_CASE("normalized matrices on K3") {
  const Dataset k3 = complete(3);
  const auto s = normalized_matrix(k3, FilterKind::symmetric);
  const auto r = normalized_matrix(k3, FilterKind::random_walk);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const double want = i == j ? 0.0 : 0.5;
      CHECK(s.matrix.coeff(i, j) == doctest::Approx(want));
      CHECK(r.matrix.coeff(i, j) == doctest::Approx(want));
    }
  }
}

TEST_CASE("isolated node yields a zero row with a flag") {
  const Dataset d = make_dataset(3, {{0, 1}}, Eigen::MatrixXd::Ones(3, 1), {0, 0, 0}, std::nullopt, 0.0);
  const auto r = normalized_matrix(d, FilterKind::random_walk);
  REQUIRE(r.zero_degree_nodes == std::vector<NodeId>{2});
  for (std::size_t j = 0; j < 3; ++j) CHECK(r.matrix.coeff(2, j) == 0.0);
}

TEST_CASE("normalized matrices match dense oracles and their invariants") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const double w = trial % 3;
    const Dataset d = testsupport::planted_partition(8 + trial, 2, 0.4, 0.1, rng, 1, w);
    const Eigen::MatrixXd a = testsupport::dense_adjacency(d.n, d.edges, w);
    const auto s = normalized_matrix(d, FilterKind::symmetric).matrix.to_dense();
    const auto r = normalized_matrix(d, FilterKind::random_walk).matrix.to_dense();
    CHECK(max_abs_diff(s, testsupport::dense_sym(a)) < 1e-14);
    CHECK(max_abs_diff(r, testsupport::dense_rw(a)) < 1e-14);
    CHECK(max_abs_diff(s, s.transpose()) < 1e-12);
    for (Eigen::Index i = 0; i < r.rows(); ++i) CHECK(std::abs(r.row(i).sum() - 1.0) < 1e-12);
    CHECK(s.minCoeff() >= 0.0);
  }
}

TEST_CASE("known block spectra") {
  SUBCASE("K3") {
    const Dataset d = complete(3);
    const auto v = within_group_structure(d);
    const auto sp = block_spectrum(normalized_matrix(d, v, FilterKind::symmetric), v);
    REQUIRE(sp.blocks.size() == 1);
    const auto& b = sp.blocks[0];
    CHECK(b.eigenvalues[0] == doctest::Approx(1.0));
    CHECK(b.eigenvalues[1] == doctest::Approx(-0.5));
    CHECK(b.eigenvalues[2] == doctest::Approx(-0.5));
    CHECK(b.gap == doctest::Approx(0.5));
  }
  SUBCASE("K4") {
    const Dataset d = complete(4);
    const auto v = within_group_structure(d);
    const auto sp = block_spectrum(normalized_matrix(d, v, FilterKind::random_walk), v);
    CHECK(sp.blocks[0].gap == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("4-cycle is bipartite") {
    const Dataset d = make_dataset(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}, Eigen::MatrixXd::Ones(4, 1),
                                   {0, 0, 0, 0}, std::nullopt, 0.0);
    const auto v = within_group_structure(d);
    const auto sp = block_spectrum(normalized_matrix(d, v, FilterKind::symmetric), v);
    CHECK(sp.blocks[0].lambda_min == doctest::Approx(-1.0));
    CHECK(sp.blocks[0].gap == doctest::Approx(1.0));
  }
}

TEST_CASE("spectral sanity, similarity equivalence and the iterative path") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset d = testsupport::planted_partition(30, 2, 0.3, 0.05, rng, 1, 1.0);
    const auto v = within_group_structure(d);
    const auto sym = block_spectrum(normalized_matrix(d, v, FilterKind::symmetric), v);
    const auto rw = block_spectrum(normalized_matrix(d, v, FilterKind::random_walk), v);
    SpectralOptions iter;
    iter.dense_limit = 2;
    const auto it = block_spectrum(normalized_matrix(d, v, FilterKind::symmetric), v, iter);
    for (std::size_t b = 0; b < sym.blocks.size(); ++b) {
      const auto& blk = sym.blocks[b];
      if (blk.size < 2) continue;
      CHECK(std::abs(blk.eigenvalues.front() - 1.0) < 1e-8);
      for (double ev : blk.eigenvalues) {
        CHECK(ev > -1.0 - 1e-12);
        CHECK(ev <= 1.0 + 1e-12);
      }
      CHECK(blk.gap >= 0.0);
      CHECK(blk.gap <= 1.0 + 1e-12);
      for (std::size_t k = 0; k < blk.eigenvalues.size(); ++k) {
        CHECK(std::abs(blk.eigenvalues[k] - rw.blocks[b].eigenvalues[k]) < 1e-8);
      }
      // Dense oracle on the block of the within-group adjacency.
      const auto& members = v.groups[b];
      const auto n = static_cast<Eigen::Index>(members.size());
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i) a(i, i) = d.self_loop_weight;
      for (const auto& e : v.wg_edges) {
        const auto iu = std::find(members.begin(), members.end(), e.u) - members.begin();
        const auto iv = std::find(members.begin(), members.end(), e.v) - members.begin();
        if (iu < n && iv < n) a(iu, iv) = a(iv, iu) = 1.0;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(testsupport::dense_sym(a));
      const Eigen::VectorXd ev = es.eigenvalues();
      const double lam2 = ev(n - 2), lmin = ev(0);
      CHECK(blk.lambda_2 == doctest::Approx(lam2).epsilon(1e-9));
      CHECK(blk.lambda_min == doctest::Approx(lmin).epsilon(1e-9));
      CHECK(it.blocks[b].gap == doctest::Approx(std::max(lam2, std::abs(lmin))).epsilon(1e-6));
      CHECK_FALSE(it.blocks[b].full_spectrum);
    }
  }
}

TEST_CASE("bounds with zero residual") {
  const Dataset k3 = complete(3);
  const auto v = within_group_structure(k3);
  const auto p = normalized_matrix(k3, FilterKind::symmetric);
  const auto ph = normalized_matrix(k3, v, FilterKind::symmetric);
  const auto b = residual_and_bounds(p, ph, block_spectrum(ph, v), 2, v);
  CHECK(b.xi_norm == doctest::Approx(0.0));
  CHECK(b.zeta_s[0] == doctest::Approx(0.25));
  CHECK(b.phat_norm == doctest::Approx(1.0));

  const Dataset two = make_dataset(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}},
                                   Eigen::MatrixXd::Ones(6, 1), {0, 0, 0, 1, 1, 1}, std::nullopt, 0.0);
  const auto v2 = within_group_structure(two);
  const auto p2 = normalized_matrix(two, FilterKind::symmetric);
  const auto ph2 = normalized_matrix(two, v2, FilterKind::symmetric);
  const auto b2 = residual_and_bounds(p2, ph2, block_spectrum(ph2, v2), 2, v2);
  REQUIRE(b2.zeta_s.size() == 2);
  CHECK(b2.zeta_s[0] == doctest::Approx(0.25));
  CHECK(b2.zeta_s[1] == doctest::Approx(0.25));
}

TEST_CASE("K3 dense powers and stationary targets") {
  const Dataset k3 = complete(3);
  const auto v = within_group_structure(k3);
  const auto p = normalized_matrix(k3, FilterKind::symmetric);
  const Eigen::MatrixXd p2 = dense_power_entries(p, 2);
  CHECK(p2(0, 0) == doctest::Approx(0.5));
  CHECK(p2(0, 1) == doctest::Approx(0.25));
  CHECK(max_abs_diff(dense_power_entries(p, 1), p.matrix.to_dense()) == 0.0);
  const double target = stationary_target(v, FilterKind::symmetric, 0, 1);
  CHECK(target == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(p2(0, 1) - target) == doctest::Approx(1.0 / 12.0));
  CHECK(std::abs(p2(0, 1) - target) <= 0.25);
}

TEST_CASE("entrywise propagation bounds on a random planted partition") {
  std::mt19937_64 rng(2024);
  const Dataset d = testsupport::planted_partition(20, 2, 0.5, 0.05, rng, 1, 1.0);
  const auto v = within_group_structure(d);
  for (auto kind : {FilterKind::symmetric, FilterKind::random_walk}) {
    const auto p = normalized_matrix(d, kind);
    const auto ph = normalized_matrix(d, v, kind);
    const auto sp = block_spectrum(ph, v);
    // Residual norm against a dense SVD of P - P-hat.
    Eigen::BDCSVD<Eigen::MatrixXd> svd(p.matrix.to_dense() - ph.matrix.to_dense());
    for (int layers : {1, 2, 4}) {
      const auto b = residual_and_bounds(p, ph, sp, layers, v);
      CHECK(b.xi_norm == doctest::Approx(svd.singularValues()(0)).epsilon(1e-9));
      const Eigen::MatrixXd pl = testsupport::power(p.matrix.to_dense(), layers);
      for (NodeId i = 0; i < d.n; ++i) {
        for (NodeId j = 0; j < d.n; ++j) {
          const int g = v.group_of[i];
          if (g == v.group_of[j]) {
            CHECK(std::abs(pl(i, j) - stationary_target(v, kind, i, j)) <= b.zeta(g) + 1e-9);
          } else {
            CHECK(std::abs(pl(i, j)) <= b.residual_term + 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("size guard and argument errors") {
  CHECK_THROWS_AS(dense_power_entries(Eigen::MatrixXd::Zero(kDensePowerLimit + 1, 1), 2), Error);
  CHECK_THROWS_AS(parse_filter("nope"), Error);
  CHECK(parse_filter("sym") == FilterKind::symmetric);
  CHECK(parse_filter("rw") == FilterKind::random_walk);
  const Dataset d = make_dataset(2, {}, Eigen::MatrixXd::Ones(2, 1), {0, 1}, std::nullopt, 0.0);
  const auto v = within_group_structure(d);
  const auto p = normalized_matrix(d, FilterKind::symmetric);
  const auto ph = normalized_matrix(d, v, FilterKind::symmetric);
  CHECK_THROWS_AS(residual_and_bounds(p, ph, block_spectrum(ph, v), 2, v), Error);
}

TEST_CASE("iterative operator norm agrees with a dense SVD") {
  std::mt19937_64 rng(31);
  const Dataset d = testsupport::planted_partition(40, 3, 0.3, 0.1, rng, 1, 1.0);
  const auto v = within_group_structure(d);
  for (auto kind : {FilterKind::symmetric, FilterKind::random_walk}) {
    const CsrMatrix xi = subtract(normalized_matrix(d, kind).matrix, normalized_matrix(d, v, kind).matrix);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(xi.to_dense());
    SpectralOptions iter;
    iter.dense_limit = 1;
    CHECK(operator_norm(xi, iter) == doctest::Approx(svd.singularValues()(0)).epsilon(1e-7));
    CHECK(operator_norm(xi) == doctest::Approx(svd.singularValues()(0)).epsilon(1e-12));
  }
}
