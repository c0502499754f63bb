/*
 * graph.hpp
 *
 * Attributed undirected graphs with social-group labels, and the
 * within-group structural view (within-group adjacency, degrees, connected
 * group refinement, volumes) that the spectral and theoretic code builds on.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gcnfair {

using NodeId = std::uint32_t;

// Unordered node pair, stored canonically with u < v when used as an edge.
struct NodePair {
  NodeId u{0};
  NodeId v{0};

  friend bool operator==(const NodePair&, const NodePair&) = default;
  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

inline NodePair canonical(NodeId a, NodeId b) noexcept {
  return a < b ? NodePair{a, b} : NodePair{b, a};
}

enum class FeatureNorm { none, row_sum_one, minmax_signed };

FeatureNorm parse_feature_norm(const std::string& name);
const char* to_string(FeatureNorm mode) noexcept;

struct LoadOptions {
  // Added to each node's degree (and to the diagonal of A) for its self-loop.
  double self_loop_weight = 1.0;
  FeatureNorm normalization = FeatureNorm::none;
};

struct Dataset {
  std::size_t n = 0;
  std::vector<NodePair> edges;  // canonical, sorted, unique, no self-pairs
  Eigen::MatrixXd features;     // n x d
  std::vector<int> s_labels;    // dense ids in [0, B)
  std::optional<std::vector<int>> t_labels;  // dense ids in [0, 2)
  double self_loop_weight = 1.0;

  std::vector<std::string> s_names;
  std::vector<std::string> t_names;
  std::size_t dropped_duplicates = 0;
  std::vector<std::size_t> degenerate_feature_rows;

  std::size_t feature_dim() const noexcept {
    return static_cast<std::size_t>(features.cols());
  }
  int num_s_groups() const noexcept { return static_cast<int>(s_names.size()); }
  bool has_subgroups() const noexcept { return t_labels.has_value(); }
};

// Validates and canonicalizes the given parts into a Dataset. Reversed and
// duplicate edges are folded; `dropped_duplicates` counts the folded lines.
// Label names default to the decimal id when not given.
Dataset make_dataset(std::size_t n, const std::vector<NodePair>& edges,
                     Eigen::MatrixXd features, std::vector<int> s_labels,
                     std::optional<std::vector<int>> t_labels = std::nullopt,
                     double self_loop_weight = 1.0);

// Returns a copy of `base` whose edge set is replaced by `edges`.
Dataset with_edges(const Dataset& base, const std::vector<NodePair>& edges);

Dataset load_dataset(const std::filesystem::path& edge_path,
                     const std::filesystem::path& feature_path,
                     const std::filesystem::path& label_path,
                     const LoadOptions& options = {});

void write_dataset(const Dataset& data, const std::filesystem::path& edge_path,
                   const std::filesystem::path& feature_path,
                   const std::filesystem::path& label_path);

// Full degree: self_loop_weight + number of incident edges.
std::vector<double> full_degrees(const Dataset& data);

struct WithinGroupView {
  std::vector<NodePair> wg_edges;
  std::vector<double> wg_degrees;  // D-hat, including self-loop weight
  std::vector<int> group_of;       // refined group id per node
  std::vector<std::vector<NodeId>> groups;  // members, ascending
  std::vector<double> volumes;
  std::vector<int> source_label;   // S label each refined group came from
  // Refined groups that are a single node with no within-group edges.
  std::vector<int> singleton_groups;

  int num_groups() const noexcept { return static_cast<int>(groups.size()); }
};

// Keeps edges whose endpoints share an S label, then splits every labelled
// group into its connected components (each becomes its own group). Refined
// groups are numbered by their smallest member.
WithinGroupView within_group_structure(const Dataset& data);

struct NormalizedFeatures {
  Eigen::MatrixXd values;
  // Rows (row_sum_one) or columns (minmax_signed) that were left unchanged.
  std::vector<std::size_t> degenerate;
};

NormalizedFeatures normalize_features(const Eigen::MatrixXd& features,
                                      FeatureNorm mode);

}  // namespace gcnfair
