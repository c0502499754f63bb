#include "gcnfair/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gcnfair/error.hpp"

namespace gcnfair {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kExactAucLimit = 10000;

void require_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::dimension_mismatch, std::string(what) + ": arrays are not aligned");
  }
}

double auc_pair_count(std::span<const double> pos, std::span<const double> neg) {
  double wins = 0.0;
  for (double p : pos) {
    for (double q : neg) {
      if (p > q) wins += 1.0;
      else if (p == q) wins += 0.5;
    }
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

double auc_rank_sum(std::span<const double> pos, std::span<const double> neg) {
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> items;
  items.reserve(pos.size() + neg.size());
  for (double p : pos) items.push_back({p, true});
  for (double q : neg) items.push_back({q, false});
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.score < b.score; });
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < items.size()) {
    std::size_t j = i;
    while (j < items.size() && items[j].score == items[i].score) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based mean rank
    for (std::size_t k = i; k < j; ++k) {
      if (items[k].positive) rank_sum += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

std::vector<DeviationBin> decile_bins(std::span<const double> key, std::span<const double> dev) {
  std::vector<std::size_t> order(key.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  const std::size_t bins = std::min<std::size_t>(10, key.size());
  std::vector<DeviationBin> out;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t lo = b * key.size() / bins;
    const std::size_t hi = (b + 1) * key.size() / bins;
    if (hi <= lo) continue;
    DeviationBin bin;
    bin.lo = key[order[lo]];
    bin.hi = key[order[hi - 1]];
    double sum = 0.0;
    for (std::size_t k = lo; k < hi; ++k) sum += dev[order[k]];
    bin.count = hi - lo;
    bin.mean_deviation = sum / static_cast<double>(bin.count);
    out.push_back(bin);
  }
  return out;
}

}  // namespace

bool MetricValue::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

MetricValue roc_auc(std::span<const double> positive, std::span<const double> negative) {
  if (positive.empty() || negative.empty()) {
    throw Error(ErrorCode::invalid_argument, "roc_auc needs both positive and negative samples");
  }
  MetricValue out{"auc", 0.0, positive.size() + negative.size(), {}};
  out.value = out.n < kExactAucLimit ? auc_pair_count(positive, negative)
                                     : auc_rank_sum(positive, negative);
  return out;
}

MetricValue roc_auc(std::span<const double> scores, std::span<const int> labels) {
  require_aligned(scores.size(), labels.size(), "roc_auc");
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (labels[i] ? pos : neg).push_back(scores[i]);
  }
  return roc_auc(pos, neg);
}

MetricValue nrmse(std::span<const double> predictions, std::span<const double> targets) {
  require_aligned(predictions.size(), targets.size(), "nrmse");
  if (targets.empty()) throw Error(ErrorCode::invalid_argument, "nrmse on empty input");
  MetricValue out{"nrmse", 0.0, targets.size(), {}};
  double sq = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double d = predictions[i] - targets[i];
    sq += d * d;
  }
  const auto [lo, hi] = std::minmax_element(targets.begin(), targets.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) {
    out.value = kNaN;
    out.flags.push_back("degenerate_range");
    return out;
  }
  out.value = std::sqrt(sq / static_cast<double>(targets.size())) / range;
  return out;
}

MetricValue pcc(std::span<const double> x, std::span<const double> y) {
  require_aligned(x.size(), y.size(), "pcc");
  if (x.size() < 2) throw Error(ErrorCode::invalid_argument, "pcc needs at least 2 samples");
  MetricValue out{"pcc", 0.0, x.size(), {}};
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    out.value = kNaN;
    out.flags.push_back("undefined");
    return out;
  }
  out.value = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return out;
}

DeviationReport deviation_analysis(std::span<const double> deviation,
                                   std::span<const double> degree_product,
                                   std::span<const double> similarity) {
  require_aligned(deviation.size(), degree_product.size(), "deviation_analysis");
  require_aligned(deviation.size(), similarity.size(), "deviation_analysis");
  if (deviation.empty()) throw Error(ErrorCode::invalid_argument, "deviation_analysis on empty input");

  // Zero degree products have no logarithm; those pairs are left out of the
  // degree association only.
  std::vector<double> log_dp, dev_dp;
  for (std::size_t i = 0; i < deviation.size(); ++i) {
    if (degree_product[i] > 0.0) {
      log_dp.push_back(std::log(degree_product[i]));
      dev_dp.push_back(deviation[i]);
    }
  }
  DeviationReport out;
  if (log_dp.size() >= 2) {
    out.pcc_log_degree = pcc(dev_dp, log_dp);
  } else {
    out.pcc_log_degree = {"pcc", kNaN, log_dp.size(), {"undefined"}};
  }
  out.pcc_log_degree.name = "pcc_deviation_log_degree_product";
  if (deviation.size() >= 2) {
    out.pcc_similarity = pcc(deviation, similarity);
  } else {
    out.pcc_similarity = {"pcc", kNaN, deviation.size(), {"undefined"}};
  }
  out.pcc_similarity.name = "pcc_deviation_similarity";
  if (!log_dp.empty()) out.degree_bins = decile_bins(log_dp, dev_dp);
  out.similarity_bins = decile_bins(similarity, deviation);
  return out;
}

MetricValue max_degree_ratio(std::span<const double> degrees) {
  double lo = 0.0, hi = 0.0;
  std::size_t used = 0, excluded = 0;
  for (double d : degrees) {
    if (!(d > 0.0)) {
      ++excluded;
      continue;
    }
    lo = used ? std::min(lo, d) : d;
    hi = std::max(hi, d);
    ++used;
  }
  if (used == 0) throw Error(ErrorCode::degenerate, "max_degree_ratio: all degrees are zero");
  MetricValue out{"max_degree_ratio", std::sqrt(hi / lo), used, {}};
  if (excluded) out.flags.push_back("excluded=" + std::to_string(excluded));
  return out;
}

}  // namespace gcnfair
