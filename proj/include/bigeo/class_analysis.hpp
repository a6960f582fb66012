#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "bigeo/diffusion.hpp"

namespace bigeo {

/// exp(-D / sigma) over a class distance matrix. A missing sigma resolves to
/// the median positive off-diagonal distance.
AffinityMatrix class_affinity(const Eigen::MatrixXd& distances, std::optional<double> sigma);

enum class ClassKernelMode {
  direct,  // leading eigenvectors of K itself
  markov,  // nontrivial eigenvectors of D^-1/2 K D^-1/2
};

struct ClassEmbedding {
  Eigen::MatrixXd coords;  // C x d, orthonormal columns
  Eigen::VectorXd eigenvalues;
  double sigma = 0.0;
};

ClassEmbedding class_embed(const AffinityMatrix& kernel, std::size_t dims,
                           ClassKernelMode mode = ClassKernelMode::direct);

/// Row-normalized exp(-|xi_i - xi_j|^2 / sigma^2), self term included.
Eigen::MatrixXd embedding_kernel(const Eigen::MatrixXd& coords, double sigma = 0.5);

/// |f - K f| / |f| in the Euclidean norm.
double prediction_error(const Eigen::VectorXd& f, const Eigen::MatrixXd& kernel);

struct ValidationReport {
  std::string covariate;
  Eigen::VectorXd values;  // f
  double true_error = 0.0;
  std::vector<double> null_errors;
  /// (1 + #{null <= true}) / (1 + n_perm).
  double p_value = 1.0;
  Eigen::VectorXd residuals;  // f - K f
  std::vector<std::string> class_ids;
};

/// n_perm uniform relabelings f~_i = f(pi_i); replica r draws from its own
/// generator seeded by derive_seed(seed, r), so results do not depend on threads.
ValidationReport permutation_test(const Eigen::VectorXd& f, const Eigen::MatrixXd& kernel, std::size_t n_perm,
                                  std::uint64_t seed, std::string covariate = "f",
                                  std::vector<std::string> class_ids = {});

struct OutlierList {
  std::vector<std::size_t> classes;  // indices, largest |residual| first
  bool clamped = false;              // top_k exceeded the class count
};

/// Classes by |residual| descending, ties by class id (index when no ids).
OutlierList residual_outliers(const ValidationReport& report, std::size_t top_k);

nlohmann::json report_json(const ValidationReport& report, std::size_t histogram_bins = 20, std::size_t top_k = 10);

}  // namespace bigeo
