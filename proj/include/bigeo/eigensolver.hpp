#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace bigeo {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class SpectrumEnd {
  largest_magnitude,  // order by |lambda| descending
  largest_algebraic,  // order by lambda descending
};

struct EigenPairs {
  Eigen::VectorXd values;   // ordered per the requested SpectrumEnd
  Eigen::MatrixXd vectors;  // unit-norm columns
};

struct EigenOptions {
  /// Matrices up to this size are solved densely.
  std::size_t dense_limit = 600;
  double tolerance = 1e-10;
  std::uint64_t seed = 0x5eed;
};

/// k extreme eigenpairs of the symmetric matrix A restricted to the orthogonal
/// complement of the columns of `deflate` (orthonormal; may have zero columns).
/// Large problems use Lanczos with full reorthogonalization, growing the Krylov
/// space until every requested Ritz residual is below tolerance * max(1, |lambda|).
/// Throws Error with the worst residual if that never happens.
EigenPairs symmetric_eigs(const SparseMatrix& a, std::size_t k, SpectrumEnd end,
                          const Eigen::MatrixXd& deflate, const EigenOptions& options = {});

/// Flips each column so that its largest-magnitude entry (lowest index on ties)
/// is positive.
void fix_signs(Eigen::MatrixXd& vectors);

}  // namespace bigeo
