#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gcnfair/error.hpp"
#include "gcnfair/pipeline.hpp"
#include "gcnfair/synth.hpp"

using namespace gcnfair;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gcnfair_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig small_config() {
  return parse_run_config(R"({
    "dataset_name": "tiny",
    "synth": {"group_sizes": [40, 40], "p_in": 0.15, "p_out": 0.005, "t1_fraction": 0.4,
              "disparity_boost": 3.0, "feature_dim": 8, "feature_separation": 2.0, "seed": 4},
    "filter": "sym", "layers": 2, "dims": [16, 8], "epochs": 15, "seeds": 2, "lambda_fair": [0, 1]
  })");
}

}  // namespace

TEST_CASE("synthetic beds: homophily, degree boost and validation") {
  SynthConfig c;
  c.group_sizes = {50, 50, 50};
  c.p_in = 0.2;
  c.p_out = 0.002;
  c.disparity_boost = 4.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    c.seed = seed;
    const Dataset d = synth_generate(c);
    std::size_t within = 0;
    for (const auto& e : d.edges) within += d.s_labels[e.u] == d.s_labels[e.v];
    CHECK(static_cast<double>(within) / static_cast<double>(d.edges.size()) > 0.9);
    const auto v = within_group_structure(d);
    for (int s = 0; s < 3; ++s) {
      double sum[2] = {0, 0}, cnt[2] = {0, 0};
      for (NodeId i = 0; i < d.n; ++i) {
        if (d.s_labels[i] != s) continue;
        sum[(*d.t_labels)[i]] += v.wg_degrees[i];
        cnt[(*d.t_labels)[i]] += 1;
      }
      REQUIRE(cnt[0] > 0);
      REQUIRE(cnt[1] > 0);
      CHECK(sum[0] / cnt[0] > sum[1] / cnt[1]);
    }
  }
  SynthConfig bad = c;
  bad.p_in = 1.5;
  CHECK_THROWS(validate(bad));
  bad = c;
  bad.group_sizes = {1, 10};
  CHECK_THROWS(validate(bad));
}

TEST_CASE("synthetic files are byte-identical for a fixed seed and reload") {
  SynthConfig c;
  c.seed = 9;
  const fs::path a = scratch("synth_a"), b = scratch("synth_b");
  const SynthFiles fa = synth_write(c, a);
  const SynthFiles fb = synth_write(c, b);
  CHECK(slurp(fa.edges) == slurp(fb.edges));
  CHECK(slurp(fa.features) == slurp(fb.features));
  CHECK(slurp(fa.labels) == slurp(fb.labels));
  const Dataset d = load_dataset(fa.edges, fa.features, fa.labels);
  const Dataset g = synth_generate(c);
  CHECK(d.n == g.n);
  CHECK(d.edges.size() == g.edges.size());
  CHECK((d.features - g.features).cwiseAbs().maxCoeff() == 0.0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("run config parsing, hashing and errors") {
  const RunConfig c = small_config();
  CHECK(c.seeds == std::vector<std::uint64_t>{0, 1});
  CHECK(c.train.epochs == 15);
  CHECK(config_hash(c).size() == 8);
  CHECK(config_hash(c) == config_hash(parse_run_config(to_json_text(c))));
  RunConfig other = c;
  other.layers = 3;
  other.dims.clear();
  CHECK(config_hash(other) != config_hash(c));
  CHECK(run_directory("runs", "train", c).filename().string() == "train-tiny-sym-" + config_hash(c));
  CHECK_THROWS_AS(parse_run_config("{not json"), Error);
  CHECK_THROWS_AS(parse_run_config(R"({"filter": "lap"})"), Error);
  CHECK(mean_std({2.0, 4.0}).std == doctest::Approx(std::sqrt(2.0)));
  CHECK(mean_std({3.0}).std == 0.0);
}

TEST_CASE("train runs are reproducible byte for byte") {
  const RunConfig c = small_config();
  const fs::path a = scratch("train_a"), b = scratch("train_b");
  const auto ra = run_train(c, a);
  run_train(c, b);
  CHECK(ra.runs.size() == 2);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(slurp(a / "history.csv") == slurp(b / "history.csv"));
  CHECK(fs::exists(a / "model_seed0.json"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("theory metrics can be recomputed from the pairs file") {
  RunConfig c = small_config();
  c.seeds = {0};
  const fs::path dir = scratch("theory");
  const auto r = run_validate_theory(c, dir);
  REQUIRE(r.reports.size() == 1);
  std::ifstream in(dir / "pairs.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "seed,group,u,v,label,tau_raw,tau_fitted,gcn_score");
  std::vector<double> fitted, score;
  while (std::getline(in, line)) {
    const auto cells = split_csv(line);
    REQUIRE(cells.size() == 8);
    fitted.push_back(std::stod(cells[6]));
    score.push_back(std::stod(cells[7]));
  }
  REQUIRE(fitted.size() == r.reports[0].pairs.size());
  const double lo = *std::min_element(score.begin(), score.end());
  const double hi = *std::max_element(score.begin(), score.end());
  double se = 0, mf = 0, ms = 0;
  for (std::size_t k = 0; k < fitted.size(); ++k) {
    se += (fitted[k] - score[k]) * (fitted[k] - score[k]);
    mf += fitted[k];
    ms += score[k];
  }
  mf /= static_cast<double>(fitted.size());
  ms /= static_cast<double>(fitted.size());
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < fitted.size(); ++k) {
    sxy += (fitted[k] - mf) * (score[k] - ms);
    sxx += (fitted[k] - mf) * (fitted[k] - mf);
    syy += (score[k] - ms) * (score[k] - ms);
  }
  const double nrmse = std::sqrt(se / static_cast<double>(fitted.size())) / (hi - lo);
  CHECK(r.reports[0].nrmse.value == doctest::Approx(nrmse).epsilon(1e-9));
  CHECK(r.reports[0].pcc.value == doctest::Approx(sxy / std::sqrt(sxx * syy)).epsilon(1e-9));
  fs::remove_all(dir);
}

TEST_CASE("fairness sweep: lambda 0 matches plain training and rows are descending") {
  const RunConfig c = small_config();
  const auto table = run_fairness_sweep(c);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].lambda_fair == 1.0);
  CHECK(table.rows[1].lambda_fair == 0.0);
  const auto plain = run_train(c);
  for (std::size_t s = 0; s < plain.runs.size(); ++s) CHECK(table.rows[1].seed_auc[s] == plain.runs[s].test_auc);
}
