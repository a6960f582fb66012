#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace bigeo {

struct Folder {
  static constexpr std::size_t kNoParent = std::numeric_limits<std::size_t>::max();

  std::vector<std::size_t> members;  // sorted element indices
  std::size_t parent = kNoParent;    // index into the previous (coarser) level
  std::vector<std::size_t> children; // indices into the next (finer) level
};

/// Nested partitions of {0, ..., n-1}. Levels are numbered from 1 (the root,
/// a single folder holding every element) to level_count() (singletons).
/// Folders within a level are ordered by their smallest member.
class PartitionTree {
 public:
  /// Takes levels root-first with members filled in; derives parent/child
  /// links and checks every structural invariant (throws Error on violation).
  explicit PartitionTree(std::vector<std::vector<Folder>> levels);

  std::size_t level_count() const { return levels_.size(); }
  std::size_t element_count() const { return element_count_; }
  /// Folders of the 1-based level `level`.
  const std::vector<Folder>& level(std::size_t level) const;
  /// Folder index containing `element` at the 1-based `level`.
  std::size_t folder_of(std::size_t level, std::size_t element) const;
  std::size_t total_folders() const;
  /// Structural hash; equal trees have equal fingerprints.
  std::uint64_t fingerprint() const { return fingerprint_; }

  /// Disjointness, coverage, parent = union of children, root and leaf shape.
  void check_invariants() const;

 private:
  std::vector<std::vector<Folder>> levels_;
  std::vector<std::vector<std::size_t>> assignment_;  // [level][element] -> folder
  std::size_t element_count_ = 0;
  std::uint64_t fingerprint_ = 0;
};

struct TreeOptions {
  /// Covering radius; unset means half the median pairwise distance.
  std::optional<double> base_radius;
  double merge_factor = 2.0;
  std::uint64_t seed = 0;
};

/// Bottom-up tree over the rows of `coords`. A greedy ball cover of radius
/// eps0 (scanned in a seeded random order) forms the level above the
/// singletons; each coarser level merges closest-centroid pairs while their
/// distance is below eps0 * merge_factor^h, h = 1, 2, ... until one folder
/// remains. Heights that merge nothing do not create a level.
PartitionTree build_tree(const Eigen::MatrixXd& coords, const TreeOptions& options = {});

/// Radius that build_tree would use for `coords`.
double resolve_base_radius(const Eigen::MatrixXd& coords, const TreeOptions& options);

/// gamma[level-1][k] = |folder k| / n.
struct FolderWeights {
  std::vector<std::vector<double>> gamma;
  std::uint64_t tree_fingerprint = 0;
};

FolderWeights folder_weights(const PartitionTree& tree);

nlohmann::json tree_to_json(const PartitionTree& tree, const std::vector<std::string>& element_ids);
/// Inverse of tree_to_json; element_ids receives the stored id order.
PartitionTree tree_from_json(const nlohmann::json& j, std::vector<std::string>* element_ids = nullptr);

}  // namespace bigeo
