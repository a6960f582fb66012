#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "bigeo/core_data.hpp"
#include "bigeo/diffusion.hpp"
#include "bigeo/partition_tree.hpp"
#include "bigeo/tree_emd.hpp"

namespace bigeo {

struct OrganizeConfig {
  std::size_t point_dims = 8;    // m_X
  std::size_t feature_dims = 4;  // m_Y
  /// Metric on points induced by the feature tree.
  EmdParams point_emd{0.5, 1.0, {}};
  /// Metric on features induced by the point tree.
  EmdParams feature_emd{0.5, 1.0, {}};
  /// Number of point-organization phases.
  std::size_t n_iter = 3;
  /// Stop early once consecutive point trees reach stability >= 1 - tol.
  /// Unset runs exactly n_iter phases.
  std::optional<double> stability_tol;
  /// Neighbour count for the initial Gaussian kernel on features.
  std::size_t feature_knn = 16;
  /// Neighbour count for the EMD kernels; 0 keeps them dense.
  std::size_t point_knn = 0;
  std::size_t feature_emd_knn = 0;
  std::optional<double> feature_sigma;
  std::optional<double> point_epsilon;
  std::optional<double> feature_epsilon;
  unsigned diffusion_time = 1;
  double merge_factor = 2.0;
  std::optional<double> point_radius;
  std::optional<double> feature_radius;
  std::uint64_t seed = 0;
};

struct OrganizationState {
  DiffusionEmbedding feature_embedding;
  PartitionTree feature_tree;
  std::optional<DiffusionEmbedding> point_embedding;
  std::optional<PartitionTree> point_tree;
  /// Point-organization phases performed.
  std::size_t iterations = 0;
  /// Stability of each point tree against its predecessor (from phase 2 on).
  std::vector<double> stability_trace;
  /// Last entry of stability_trace, 0 before two phases have run.
  double stability = 0.0;

  /// d(x_i, x_j) = |Phi_t(x_i) - Phi_t(x_j)|, the final point metric.
  Eigen::MatrixXd point_metric() const;
};

/// Alternates feature organization (kernel, embedding, tree) and point
/// organization (tree-EMD over the feature tree, kernel, embedding, tree).
/// With n_iter = 0 only the initial feature organization runs.
OrganizationState bigeometric_organize(const DataMatrix& matrix, const OrganizeConfig& config);

/// Adjusted Rand index between two labelings of the same elements.
double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b);

/// ARI between the level-2 partitions of two trees, clamped to [0, 1].
double tree_stability(const PartitionTree& previous, const PartitionTree& next);

nlohmann::json organize_config_json(const OrganizeConfig& config);
OrganizeConfig organize_config_from_json(const nlohmann::json& j);

}  // namespace bigeo
