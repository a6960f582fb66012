#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "bigeo/diffusion.hpp"
#include "bigeo/partition_tree.hpp"

namespace bigeo {

/// Parameters of the multiscale tree distance
///   sum_{l in levels} 2^(alpha * l) * sum_k gamma_{l,k}^beta * |delta^a_{l,k} - delta^b_{l,k}|
/// with levels numbered from 1 at the root.
struct EmdParams {
  double alpha = 0.5;
  double beta = 1.0;
  /// 1-based level numbers; empty means every level of the tree.
  std::vector<std::size_t> levels;
};

/// Every level except the root and the singleton leaves. Falls back to all
/// non-root levels when the tree has no interior level.
std::vector<std::size_t> interior_levels(const PartitionTree& tree);

/// Mean of a point's responses over the features in each folder of a feature tree.
struct FolderProfile {
  std::vector<std::vector<double>> delta;  // [level-1][folder]
  std::uint64_t tree_fingerprint = 0;
};

/// Mass of a class in each folder of a point tree (uniform 1/|Z| per member).
struct ClassHistogram {
  std::vector<std::vector<double>> delta;  // [level-1][folder]
  std::uint64_t tree_fingerprint = 0;
};

/// Bottom-up: leaves take the raw response, parents the size-weighted mean of children.
FolderProfile folder_profile(std::span<const double> point, const PartitionTree& feature_tree);

double point_tree_emd(const FolderProfile& a, const FolderProfile& b, const FolderWeights& weights,
                      const EmdParams& params);

ClassHistogram class_histogram(std::span<const std::size_t> members, const PartitionTree& point_tree);

double class_tree_emd(const ClassHistogram& a, const ClassHistogram& b, const FolderWeights& weights,
                      const EmdParams& params);

using ProgressHook = std::function<void(std::size_t done, std::size_t total)>;

/// C x C symmetric matrix with zero diagonal. Rows are computed in parallel.
Eigen::MatrixXd pairwise_class_emd(const std::vector<ClassHistogram>& histograms, const FolderWeights& weights,
                                   const EmdParams& params, const ProgressHook& progress = {});

/// All-pairs tree distance between the rows of `data`, each read as a profile
/// over `feature_tree` (data.cols() == element count). Equivalent to calling
/// folder_profile and point_tree_emd on every pair.
Eigen::MatrixXd pairwise_point_emd(const Eigen::MatrixXd& data, const PartitionTree& feature_tree,
                                   const EmdParams& params);

/// Entrywise exp(-d / epsilon); a missing epsilon resolves to the median
/// off-diagonal distance. The kernel is dense.
AffinityMatrix emd_affinity(const Eigen::MatrixXd& distances, std::optional<double> epsilon);

/// Per-folder coefficient 2^(alpha*l) * gamma^beta over the selected levels,
/// flattened level by level; zero for excluded levels.
std::vector<double> folder_coefficients(const FolderWeights& weights, const EmdParams& params);

nlohmann::json histogram_json(const ClassHistogram& histogram);

}  // namespace bigeo
