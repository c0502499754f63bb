/*
 * synth.hpp
 *
 * Planted-partition test beds with subgroup degree disparity and
 * group-dependent Gaussian features.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gcnfair/graph.hpp"

namespace gcnfair {

struct SynthConfig {
  std::vector<std::size_t> group_sizes{30, 30};
  double p_in = 0.3;
  double p_out = 0.01;
  double t1_fraction = 0.5;
  // Expected extra within-group edges per T1 node (Poisson).
  double disparity_boost = 0.0;
  std::size_t feature_dim = 16;
  double feature_separation = 1.0;  // distance of each group mean from the origin
  double feature_noise = 1.0;       // per-coordinate standard deviation
  double self_loop_weight = 1.0;
  std::uint64_t seed = 0;
};

// Throws invalid_argument when the config breaks its invariants.
void validate(const SynthConfig& config);

Dataset synth_generate(const SynthConfig& config);

struct SynthFiles {
  std::filesystem::path edges;
  std::filesystem::path features;
  std::filesystem::path labels;
};

// Writes edges.txt, features.csv and labels.tsv under `dir`.
SynthFiles synth_write(const SynthConfig& config, const std::filesystem::path& dir);

}  // namespace gcnfair
