#include "gcnfair/synth.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "gcnfair/error.hpp"

namespace gcnfair {

void validate(const SynthConfig& c) {
  if (c.group_sizes.empty()) throw Error(ErrorCode::invalid_argument, "no groups configured");
  for (auto s : c.group_sizes) {
    if (s < 2) throw Error(ErrorCode::invalid_argument, "group sizes must be >= 2");
  }
  if (!(0.0 <= c.p_out && c.p_out <= c.p_in && c.p_in <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "need 0 <= p_out <= p_in <= 1");
  }
  if (!(c.t1_fraction > 0.0 && c.t1_fraction < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "t1_fraction must lie in (0, 1)");
  }
  if (c.disparity_boost < 0.0) throw Error(ErrorCode::invalid_argument, "disparity_boost < 0");
  if (c.feature_dim == 0) throw Error(ErrorCode::invalid_argument, "feature_dim must be >= 1");
  if (c.feature_noise < 0.0) throw Error(ErrorCode::invalid_argument, "feature_noise < 0");
  if (c.self_loop_weight < 0.0) throw Error(ErrorCode::invalid_argument, "self_loop_weight < 0");
}

Dataset synth_generate(const SynthConfig& c) {
  validate(c);
  std::mt19937_64 rng(c.seed);
  std::size_t n = 0;
  for (auto s : c.group_sizes) n += s;
  const auto groups = static_cast<int>(c.group_sizes.size());

  std::vector<int> s(n), t(n);
  std::vector<std::vector<NodeId>> members(c.group_sizes.size());
  {
    NodeId next = 0;
    for (int b = 0; b < groups; ++b) {
      const std::size_t size = c.group_sizes[static_cast<std::size_t>(b)];
      std::vector<NodeId> ids(size);
      for (auto& id : ids) {
        id = next++;
        s[id] = b;
      }
      // Subgroup membership is a random subset of the group.
      auto shuffled = ids;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      const auto n_t1 = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::llround(c.t1_fraction * static_cast<double>(size))), 1,
          size - 1);
      for (std::size_t k = 0; k < size; ++k) t[shuffled[k]] = k < n_t1 ? 0 : 1;
      members[static_cast<std::size_t>(b)] = std::move(ids);
    }
  }

  std::set<NodePair> edges;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      const double p = s[u] == s[v] ? c.p_in : c.p_out;
      if (unif(rng) < p) edges.insert({u, v});
    }
  }

  if (c.disparity_boost > 0.0) {
    std::poisson_distribution<int> extra(c.disparity_boost);
    for (NodeId u = 0; u < n; ++u) {
      if (t[u] != 0) continue;
      const auto& group = members[static_cast<std::size_t>(s[u])];
      std::uniform_int_distribution<std::size_t> pick(0, group.size() - 1);
      const int k = extra(rng);
      for (int e = 0; e < k; ++e) {
        const NodeId v = group[pick(rng)];
        if (v != u) edges.insert(canonical(u, v));
      }
    }
  }

  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(groups, static_cast<Eigen::Index>(c.feature_dim));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int b = 0; b < groups; ++b) {
    Eigen::VectorXd dir(static_cast<Eigen::Index>(c.feature_dim));
    for (auto& x : dir) x = normal(rng);
    if (dir.norm() > 0.0) dir.normalize();
    means.row(b) = c.feature_separation * dir.transpose();
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c.feature_dim));
  for (NodeId i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) = means(s[i], k) + c.feature_noise * normal(rng);
  }

  Dataset data = make_dataset(n, {edges.begin(), edges.end()}, std::move(x), std::move(s),
                              std::move(t), c.self_loop_weight);
  data.s_names.clear();
  for (int b = 0; b < groups; ++b) data.s_names.push_back("S" + std::to_string(b));
  data.t_names = {"T1", "T2"};
  return data;
}

SynthFiles synth_write(const SynthConfig& config, const std::filesystem::path& dir) {
  const Dataset data = synth_generate(config);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());
  SynthFiles files{dir / "edges.txt", dir / "features.csv", dir / "labels.tsv"};
  write_dataset(data, files.edges, files.features, files.labels);
  return files;
}

}  // namespace gcnfair
