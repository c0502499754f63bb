/*
 * pipeline.hpp
 *
 * End-to-end runs over a seed set: training, theory validation, the
 * lambda_fair sweep, and the Delta-hat versus Delta comparison. Each run can
 * write its outputs into a directory named after the command, dataset,
 * filter and a hash of the resolved configuration.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gcnfair/fairness.hpp"
#include "gcnfair/gcn.hpp"
#include "gcnfair/synth.hpp"
#include "gcnfair/theory.hpp"

namespace gcnfair {

struct RunConfig {
  std::string dataset_name = "dataset";
  // Either files or a synthetic generator.
  std::filesystem::path edges, features, labels;
  std::optional<SynthConfig> synth;
  FeatureNorm normalization = FeatureNorm::none;
  double self_loop_weight = 1.0;

  FilterKind filter = FilterKind::symmetric;
  int layers = 2;
  std::vector<int> dims;  // empty: default widths for `layers`
  TrainConfig train;      // train.seed and train.lambda_fair are set per run
  SplitRatios ratios = kDefaultRatios;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<double> lambda_fair{0.0};
  bool spectral_diagnostics = false;

  std::vector<int> layer_dims() const;
};

// Relative dataset paths resolve against `base_dir`.
RunConfig parse_run_config(const std::string& json_text,
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
// Canonical JSON (sorted keys) of the resolved configuration.
std::string to_json_text(const RunConfig& config);
// First 8 hex digits of the 64-bit FNV-1a hash of to_json_text(config).
std::string config_hash(const RunConfig& config);
std::filesystem::path run_directory(const std::filesystem::path& out, const std::string& command,
                                    const RunConfig& config);

Dataset load_run_dataset(const RunConfig& config);

struct SeedRun {
  std::uint64_t seed = 0;
  LinkSplit split;
  TrainResult result;
  double test_auc = 0.0;
};

SeedRun train_seed(const Dataset& data, const RunConfig& config, std::uint64_t seed,
                   double lambda_fair);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};
MeanStd mean_std(const std::vector<double>& values);

struct TrainRunResult {
  std::vector<SeedRun> runs;
  MeanStd test_auc;
};
TrainRunResult run_train(const RunConfig& config, const std::filesystem::path& out_dir = {});

struct TheoryRunResult {
  std::vector<std::uint64_t> seeds;
  std::vector<TheoryReport> reports;
  MeanStd nrmse, pcc, auc;
};
TheoryRunResult run_validate_theory(const RunConfig& config,
                                    const std::filesystem::path& out_dir = {});

struct SweepRow {
  double lambda_fair = 0.0;
  MeanStd mean_delta;
  MeanStd test_auc;
  std::vector<double> seed_delta;  // per seed, in seed order
  std::vector<double> seed_auc;
  std::vector<FairnessAssessment> assessments;
};
struct FairnessTable {
  std::string dataset;
  std::vector<std::uint64_t> seeds;
  std::vector<SweepRow> rows;  // lambda_fair descending
};
FairnessTable run_fairness_sweep(const RunConfig& config,
                                 const std::filesystem::path& out_dir = {});

struct DeltaRow {
  std::uint64_t seed = 0;
  int group = 0;
  double delta = 0.0;
  double delta_hat = 0.0;         // empirical, from fitted theoretic scores
  double delta_hat_closed = 0.0;  // closed form
};
struct DeltaComparison {
  std::vector<DeltaRow> rows;
  MetricValue pcc;
  MetricValue nrmse;
};
DeltaComparison run_delta_comparison(const RunConfig& config,
                                     const std::filesystem::path& out_dir = {});

}  // namespace gcnfair
