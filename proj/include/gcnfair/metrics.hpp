#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gcnfair {

struct MetricValue {
  std::string name;
  double value = 0.0;  // NaN when undefined
  std::size_t n = 0;
  std::vector<std::string> flags;

  bool has_flag(const std::string& flag) const;
  bool defined() const noexcept { return value == value; }
};

// Mann-Whitney AUC with ties counted 1/2. Exact pair counting below 10^4
// samples, rank sums above. Throws when only one class is present.
MetricValue roc_auc(std::span<const double> scores, std::span<const int> labels);
MetricValue roc_auc(std::span<const double> positive, std::span<const double> negative);

// RMSE normalized by the range (max - min) of `targets`; flagged
// "degenerate_range" and NaN when the range is zero.
MetricValue nrmse(std::span<const double> predictions, std::span<const double> targets);

// Sample Pearson correlation; flagged "undefined" and NaN on zero variance.
MetricValue pcc(std::span<const double> x, std::span<const double> y);

struct DeviationBin {
  double lo = 0.0;
  double hi = 0.0;
  double mean_deviation = 0.0;
  std::size_t count = 0;
};

struct DeviationReport {
  MetricValue pcc_log_degree;  // deviation vs log(D_i D_j)
  MetricValue pcc_similarity;  // deviation vs C1(b)^2
  std::vector<DeviationBin> degree_bins;      // deciles of log degree product
  std::vector<DeviationBin> similarity_bins;  // deciles of C1(b)^2
};

DeviationReport deviation_analysis(std::span<const double> deviation,
                                   std::span<const double> degree_product,
                                   std::span<const double> similarity);

// sqrt(max D / min positive D); excluded zero-degree nodes are counted in
// the "excluded=<k>" flag.
MetricValue max_degree_ratio(std::span<const double> degrees);

}  // namespace gcnfair
