#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>
#include <json.hpp>

#include "bigeo/eigensolver.hpp"

namespace bigeo {

/// Symmetric nonnegative kernel with unit self-affinity.
struct AffinityMatrix {
  SparseMatrix entries;
  double bandwidth = 0.0;
  /// Neighbour count used for sparsification; 0 when the kernel is dense.
  std::size_t knn = 0;

  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
};

/// Gaussian kernel exp(-|p_i - p_j|^2 / (2 sigma^2)) over the rows of `points`,
/// kept on the union of each point's knn nearest neighbours (knn = 0 keeps every
/// pair). A missing sigma resolves to the median distance over the kept pairs.
AffinityMatrix build_affinity(const Eigen::MatrixXd& points, std::optional<double> sigma,
                              std::size_t knn);

/// Row-stochastic P = D^-1 K with its symmetric conjugate D^-1/2 K D^-1/2.
class MarkovOperator {
 public:
  explicit MarkovOperator(const AffinityMatrix& kernel);

  std::size_t size() const { return static_cast<std::size_t>(transition_.rows()); }
  const SparseMatrix& transition() const { return transition_; }
  const SparseMatrix& symmetric() const { return symmetric_; }
  const Eigen::VectorXd& degrees() const { return degrees_; }
  /// Stationary distribution pi = d / sum(d).
  Eigen::VectorXd stationary() const { return degrees_ / degrees_.sum(); }

 private:
  SparseMatrix transition_;
  SparseMatrix symmetric_;
  Eigen::VectorXd degrees_;
};

MarkovOperator markov_normalize(const AffinityMatrix& kernel);

/// Row i is Phi_t(x_i) = (lambda_1^t phi_1(i), ..., lambda_d^t phi_d(i)), where
/// phi are right eigenvectors of P normalized so that sum_i pi_i phi(i)^2 = 1.
/// The trivial constant eigenvector is excluded.
struct DiffusionEmbedding {
  Eigen::MatrixXd coords;
  Eigen::VectorXd eigenvalues;
  unsigned t = 1;

  std::size_t size() const { return static_cast<std::size_t>(coords.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(coords.cols()); }
};

/// Largest-magnitude nontrivial eigenpairs; each eigenvector's largest-magnitude
/// entry is made positive.
DiffusionEmbedding spectral_embed(const MarkovOperator& markov, std::size_t dims, unsigned t,
                                  const EigenOptions& options = {});

double embed_distance(const DiffusionEmbedding& embedding, std::size_t i, std::size_t j);

/// Dense matrix of Euclidean distances between rows.
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points);

nlohmann::json eigenvalues_json(const DiffusionEmbedding& embedding);

}  // namespace bigeo

namespace bigeo {

/// Keeps each row's knn largest off-diagonal entries (union over rows) plus
/// the diagonal. knn = 0 returns the kernel unchanged.
AffinityMatrix knn_sparsify(const AffinityMatrix& kernel, std::size_t knn);

}  // namespace bigeo
