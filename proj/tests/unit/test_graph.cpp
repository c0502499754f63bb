#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "doctest.h"
#include "gcnfair/error.hpp"
#include "gcnfair/graph.hpp"
#include "support.hpp"

using namespace gcnfair;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / ("gcnfair_test_" + name)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::filesystem::path write(const std::string& file, const std::string& text) const {
    std::ofstream(path / file) << text;
    return path / file;
  }
};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST_CASE("toy fixture loads from files") {
  TempDir dir("toy");
  const auto e = dir.write("e.txt", "# toy\n0 3\n2 3\n1 3\n1 4\n3 0\n");
  const auto f = dir.write("f.csv", "1,0\n0,1\n1,1\n2,0\n0,2\n1,1\n");
  const auto l = dir.write("l.tsv", "node_id\ts_label\tt_label\n0\tCS\tw\n1\tCS\tw\n2\tCS\tw\n3\tCS\tm\n4\tCS\tw\n5\tEdu\tw\n");
  const Dataset d = load_dataset(e, f, l, {0.0, FeatureNorm::none});
  CHECK(d.n == 6);
  CHECK(d.edges.size() == 4);
  CHECK(d.dropped_duplicates == 1);
  CHECK(d.num_s_groups() == 2);
  CHECK(d.s_names == std::vector<std::string>{"CS", "Edu"});
  CHECK(d.feature_dim() == 2);
  REQUIRE(d.has_subgroups());
  CHECK((*d.t_labels)[3] != (*d.t_labels)[0]);
  for (const auto& p : d.edges) CHECK(p.u < p.v);
}

TEST_CASE("loader errors") {
  TempDir dir("errors");
  const auto f = dir.write("f.csv", "1\n1\n1\n");
  const auto l = dir.write("l.tsv", "0\ta\n1\ta\n2\tb\n");
  CHECK(code_of([&] { load_dataset(dir.write("e.txt", "0 10\n"), f, l); }) == ErrorCode::out_of_range);
  CHECK(code_of([&] { load_dataset(dir.write("e2.txt", "0 1\n"), dir.write("f2.csv", "1\n1\n"), l); }) ==
        ErrorCode::dimension_mismatch);
  CHECK(code_of([&] { load_dataset(dir.write("e3.txt", "0 1\n"), dir.write("f3.csv", "1\nx\n1\n"), l); }) ==
        ErrorCode::parse_error);
  CHECK(code_of([&] { load_dataset(dir.write("e4.txt", "0 1\n"), f, dir.write("l4.tsv", "0\ta\n2\tb\n")); }) ==
        ErrorCode::missing_labels);
}

TEST_CASE("write then load round trip") {
  std::mt19937_64 rng(3);
  const Dataset d = testsupport::planted_partition(20, 2, 0.4, 0.05, rng);
  TempDir dir("roundtrip");
  write_dataset(d, dir.path / "e.txt", dir.path / "f.csv", dir.path / "l.tsv");
  const Dataset r = load_dataset(dir.path / "e.txt", dir.path / "f.csv", dir.path / "l.tsv",
                                 {d.self_loop_weight, FeatureNorm::none});
  CHECK(r.edges == d.edges);
  CHECK(r.s_labels == d.s_labels);
  CHECK((r.features - d.features).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("within-group structure on the toy fixture") {
  const Dataset d = testsupport::toy_cs(0.0);
  const WithinGroupView v = within_group_structure(d);
  CHECK(v.wg_degrees[3] == doctest::Approx(3.0));
  const double women = (v.wg_degrees[0] + v.wg_degrees[1] + v.wg_degrees[2] + v.wg_degrees[4]) / 4.0;
  CHECK(women == doctest::Approx(1.25));
  CHECK(v.num_groups() == 2);
  CHECK(v.groups[1] == std::vector<NodeId>{5});
  CHECK(v.wg_degrees[5] == 0.0);
}

TEST_CASE("K3 degrees and volume") {
  const Dataset d = make_dataset(3, {{0, 1}, {1, 2}, {0, 2}}, Eigen::MatrixXd::Ones(3, 1), {0, 0, 0}, std::nullopt, 0.0);
  const auto v = within_group_structure(d);
  for (double x : v.wg_degrees) CHECK(x == 2.0);
  REQUIRE(v.volumes.size() == 1);
  CHECK(v.volumes[0] == 6.0);
}

TEST_CASE("disconnected label is refined into components") {
  const Dataset d = make_dataset(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}, Eigen::MatrixXd::Ones(6, 1),
                                 {0, 0, 0, 0, 0, 0});
  const auto v = within_group_structure(d);
  REQUIRE(v.num_groups() == 2);
  CHECK(v.groups[0].size() == 3);
  CHECK(v.groups[1].size() == 3);
  CHECK(v.source_label[0] == 0);
  CHECK(v.source_label[1] == 0);
}

TEST_CASE("degree identity, partition soundness and volume sums on random graphs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + static_cast<std::size_t>(trial) % 46;
    const double w = trial % 3;
    const Dataset d = testsupport::planted_partition(n, 1 + trial % 3, 0.3, 0.1, rng, 2, w);
    const auto full = full_degrees(d);
    std::vector<double> recount(n, w);
    for (const auto& e : d.edges) {
      recount[e.u] += 1;
      recount[e.v] += 1;
    }
    const auto v = within_group_structure(d);
    std::vector<int> covered(n, 0);
    double vol_total = 0.0;
    for (std::size_t b = 0; b < v.groups.size(); ++b) {
      double vol = 0.0;
      for (NodeId i : v.groups[b]) {
        ++covered[i];
        vol += v.wg_degrees[i];
        CHECK(v.group_of[i] == static_cast<int>(b));
      }
      CHECK(vol == doctest::Approx(v.volumes[b]));
      vol_total += v.volumes[b];
    }
    double deg_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(full[i] == recount[i]);
      CHECK(v.wg_degrees[i] <= full[i]);
      CHECK(v.wg_degrees[i] >= w);
      CHECK(covered[i] == 1);
      deg_total += v.wg_degrees[i];
    }
    CHECK(vol_total == doctest::Approx(deg_total));
    for (const auto& e : v.wg_edges) CHECK(d.s_labels[e.u] == d.s_labels[e.v]);
  }
}

TEST_CASE("feature normalization") {
  Eigen::MatrixXd x(3, 2);
  x << 2, 2, 0, 0, 1, 3;
  const auto r = normalize_features(x, FeatureNorm::row_sum_one);
  CHECK(r.values(0, 0) == 0.5);
  CHECK(r.values(0, 1) == 0.5);
  CHECK(r.values.row(1).isZero());
  CHECK(r.degenerate == std::vector<std::size_t>{1});
  const auto twice = normalize_features(r.values, FeatureNorm::row_sum_one);
  CHECK((twice.values - r.values).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::MatrixXd c(3, 1);
  c << 0, 5, 10;
  const auto m = normalize_features(c, FeatureNorm::minmax_signed);
  CHECK(m.values(0, 0) == -1.0);
  CHECK(m.values(1, 0) == 0.0);
  CHECK(m.values(2, 0) == 1.0);
  CHECK(parse_feature_norm("none") == FeatureNorm::none);
}
