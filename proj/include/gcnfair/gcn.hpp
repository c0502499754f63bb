/*
 * gcn.hpp
 *
 * Bias-free GCN encoders (symmetric or random-walk filter) with an
 * inner-product link scorer, hand-derived reverse-mode gradients, Adam, and
 * the split / negative-sampling / model-selection protocol for link
 * prediction.
 */
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gcnfair/fairness.hpp"
#include "gcnfair/graph.hpp"
#include "gcnfair/spectral.hpp"

namespace gcnfair {

struct Model {
  FilterKind filter = FilterKind::symmetric;
  // weights[l] maps layer l's input to its output: shape (out, in).
  std::vector<Eigen::MatrixXd> weights;
  // When set, every layer uses the identity (no ReLU); used to check the
  // linearized form of the encoder.
  bool identity_activations = false;
  std::uint64_t seed = 0;

  int layers() const noexcept { return static_cast<int>(weights.size()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(weights.front().cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(weights.back().rows()); }
};

// Layer widths (128, ..., 128, 64) for an L-layer encoder.
std::vector<int> default_layer_dims(int layers);

// Glorot-uniform weights from a seeded generator.
Model init_model(std::size_t feature_dim, std::span<const int> layer_dims, FilterKind filter,
                 std::uint64_t seed);

// H_l = sigma_l(P H_{l-1} W_l^T); ReLU below the last layer, identity on top.
Eigen::MatrixXd forward(const Model& model, const NormalizedMatrix& p, const Eigen::MatrixXd& x);

// <H_i, H_j> per pair.
std::vector<double> score_pairs(const Eigen::MatrixXd& h, std::span<const NodePair> pairs);
std::vector<double> score_pairs_sigmoid(const Eigen::MatrixXd& h, std::span<const NodePair> pairs);

struct LinkSplit {
  std::vector<NodePair> train_pos;
  std::vector<NodePair> val_pos;
  std::vector<NodePair> test_pos;
  std::vector<NodePair> val_neg;
  std::vector<NodePair> test_neg;
  std::uint64_t seed = 0;
};

using SplitRatios = std::array<double, 3>;  // train, val, test
inline constexpr SplitRatios kDefaultRatios{0.85, 0.05, 0.10};

// Seeded shuffle then partition; validation/test negatives are drawn once
// among node pairs that are not edges of the full graph.
LinkSplit split_links(std::size_t n, const std::vector<NodePair>& edges, SplitRatios ratios,
                      std::uint64_t seed);

// Distinct uniformly drawn pairs that are neither edges of `data`, self
// pairs, nor in `exclusions`.
std::vector<NodePair> sample_negatives(const Dataset& data, std::size_t count,
                                       std::uint64_t seed,
                                       std::span<const NodePair> exclusions = {});

struct LossResult {
  double loss = 0.0;  // bce + reg
  double bce = 0.0;
  double reg = 0.0;   // (lambda / B) * sum_b Delta_b
  std::vector<Eigen::MatrixXd> gradients;  // one per weight matrix
};

// Mean binary cross-entropy of sigmoid scores (positives labelled 1) plus
// the fairness term on post-sigmoid scores of the same pairs. `groups` may
// be null when lambda_fair == 0.
LossResult loss_and_gradients(const Model& model, const NormalizedMatrix& p,
                              const Eigen::MatrixXd& x, std::span<const NodePair> pos,
                              std::span<const NodePair> neg, double lambda_fair,
                              const SubgroupView* groups);

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double negative_ratio = 1.0;
  double lambda_fair = 0.0;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double reg_term = 0.0;
  double val_auc = 0.0;
};

struct TrainResult {
  Model best;
  int best_epoch = 0;
  double best_val_auc = 0.0;
  std::vector<EpochRecord> history;
};

// Full-batch Adam. Message passing uses the training positives only;
// training negatives are redrawn each epoch; the weights with the highest
// validation AUC are returned.
TrainResult train(Model model, const Dataset& data, const LinkSplit& split,
                  const TrainConfig& config);

double link_auc(const Model& model, const NormalizedMatrix& p, const Eigen::MatrixXd& x,
                std::span<const NodePair> pos, std::span<const NodePair> neg);

void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history);

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const TrainConfig& config);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace gcnfair
