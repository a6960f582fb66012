#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace bigeo {

/// n points (rows) by m features (columns). Missing cells are stored as NaN
/// until normalize_features imputes them.
struct DataMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> point_ids;
  std::vector<std::string> feature_ids;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
  bool is_missing(std::size_t i, std::size_t j) const;
  bool has_missing() const;
};

/// Per-point class codes. labels[i] indexes class_ids.
struct ClassLabeling {
  std::vector<std::size_t> labels;
  std::vector<std::string> class_ids;
  std::size_t min_class_size = 50;

  std::size_t class_count() const { return class_ids.size(); }
};

struct LoadOptions {
  std::string label_column;
  /// Column holding point ids. When absent from the header, ids are the
  /// 1-based data row numbers.
  std::string id_column = "id";
};

struct LabeledData {
  DataMatrix matrix;
  ClassLabeling labeling;
};

/// Reads a header-first CSV. Every column other than the id and label columns
/// is a numeric feature; empty cells become missing. Class ids are numbered in
/// order of first appearance.
LabeledData load_matrix(const std::filesystem::path& path, const LoadOptions& options);
LabeledData read_matrix(std::istream& in, const LoadOptions& options);

void write_matrix(const std::filesystem::path& path, const DataMatrix& matrix,
                  const ClassLabeling& labeling, const std::string& label_column = "class",
                  const std::string& id_column = "id");

enum class Scaling { zscore, none };
enum class Imputation { column_mean, drop_row };

/// Imputes missing cells, then scales. zscore uses the population standard
/// deviation; constant columns become all zeros.
DataMatrix normalize_features(const DataMatrix& matrix, Scaling scaling, Imputation imputation);

/// Restricts a labeling to the rows that survived normalization, matched by point id.
ClassLabeling align_labels(const ClassLabeling& labeling, const DataMatrix& original,
                           const DataMatrix& kept);

struct SynthSpec {
  std::size_t n_classes = 3;
  std::size_t n_archetypes = 3;
  std::size_t min_points_per_class = 50;
  std::size_t max_points_per_class = 50;
  std::size_t feature_dim = 20;
  /// Features come in this many blocks that share an archetype level. 0 means
  /// every feature is its own block.
  std::size_t feature_blocks = 0;
  double noise_scale = 0.1;
  /// n_classes x n_archetypes; each row a probability vector.
  Eigen::MatrixXd mixing;
  /// Optional planted group of each class, echoed into the ground truth.
  std::vector<std::size_t> class_groups;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SynthResult {
  DataMatrix matrix;
  ClassLabeling labeling;
  /// n_archetypes x feature_dim.
  Eigen::MatrixXd archetypes;
  /// Archetype drawn for each point.
  std::vector<std::size_t> point_archetype;
  nlohmann::json ground_truth;
};

/// Each point is an archetype row plus N(0, noise_scale^2) noise; the class row
/// of the mixing matrix decides which archetype a point draws.
SynthResult synthesize_survey(const SynthSpec& spec);

/// Mixing design with n_groups planted groups of classes. Each group favours its
/// own pair of archetypes (2 per group) and gives `leak` total mass to the rest.
SynthSpec planted_groups_spec(std::size_t n_groups, std::size_t classes_per_group,
                              std::size_t points_per_class, std::size_t feature_dim,
                              double noise_scale, std::uint64_t seed, double leak = 0.1);

struct ClassPartition {
  /// Retained classes, in class-id order of the labeling.
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::string> class_ids;
  /// Classes below min_class_size with their sizes.
  std::vector<std::pair<std::string, std::size_t>> dropped;
};

ClassPartition partition_by_class(const DataMatrix& matrix, const ClassLabeling& labeling);

}  // namespace bigeo
