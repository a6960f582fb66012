#include "bigeo/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "bigeo/error.hpp"
#include "bigeo/random.hpp"

namespace bigeo {

namespace {

std::vector<Eigen::Index> select_order(const Eigen::VectorXd& values, SpectrumEnd end) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (end == SpectrumEnd::largest_magnitude) return std::abs(values(a)) > std::abs(values(b));
    return values(a) > values(b);
  });
  return order;
}

void project_out(Eigen::Ref<Eigen::VectorXd> v, const Eigen::MatrixXd& basis, Eigen::Index columns) {
  if (columns == 0) return;
  // Two passes of classical Gram-Schmidt keep the basis orthogonal to working precision.
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd coeffs = basis.leftCols(columns).transpose() * v;
    v.noalias() -= basis.leftCols(columns) * coeffs;
  }
}

EigenPairs dense_eigs(const SparseMatrix& a, std::size_t k, SpectrumEnd end,
                      const Eigen::MatrixXd& deflate) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd dense = Eigen::MatrixXd(a);
  dense = 0.5 * (dense + dense.transpose());

  // Solve in an orthonormal basis of the complement of the deflation space.
  Eigen::MatrixXd complement;
  if (deflate.cols() > 0) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(deflate);
    const Eigen::MatrixXd q = qr.householderQ();
    complement = q.rightCols(n - deflate.cols());
    dense = complement.transpose() * dense * complement;
    dense = 0.5 * (dense + dense.transpose());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  if (solver.info() != Eigen::Success) throw Error("dense eigensolver failed");

  const auto order = select_order(solver.eigenvalues(), end);
  EigenPairs out;
  out.values.resize(static_cast<Eigen::Index>(k));
  out.vectors.resize(n, static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    out.values(static_cast<Eigen::Index>(i)) = solver.eigenvalues()(order[i]);
    if (deflate.cols() > 0) {
      out.vectors.col(static_cast<Eigen::Index>(i)) = complement * solver.eigenvectors().col(order[i]);
    } else {
      out.vectors.col(static_cast<Eigen::Index>(i)) = solver.eigenvectors().col(order[i]);
    }
  }
  return out;
}

EigenPairs lanczos_eigs(const SparseMatrix& a, std::size_t k, SpectrumEnd end,
                        const Eigen::MatrixXd& deflate, const EigenOptions& options) {
  const Eigen::Index n = a.rows();
  const Eigen::Index free_dim = n - deflate.cols();
  Eigen::Index steps = std::min<Eigen::Index>(free_dim, std::max<Eigen::Index>(2 * static_cast<Eigen::Index>(k) + 40, 80));
  Rng rng(options.seed);
  double worst = 0.0;

  while (true) {
    Eigen::MatrixXd basis(n, steps);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(steps);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(steps);  // beta(j) couples j and j+1

    auto fresh_vector = [&](Eigen::Index filled) {
      for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform01(rng) - 0.5;
        project_out(v, deflate, deflate.cols());
        project_out(v, basis, filled);
        const double norm = v.norm();
        if (norm > 1e-8) return Eigen::VectorXd(v / norm);
      }
      throw Error("Lanczos: could not extend the Krylov basis");
    };

    basis.col(0) = fresh_vector(0);
    Eigen::Index m = steps;
    for (Eigen::Index j = 0; j < steps; ++j) {
      Eigen::VectorXd w = a * basis.col(j);
      alpha(j) = basis.col(j).dot(w);
      project_out(w, deflate, deflate.cols());
      project_out(w, basis, j + 1);
      if (j + 1 == steps) {
        beta(j) = w.norm();
        break;
      }
      const double b = w.norm();
      if (b < 1e-12 * std::max(1.0, std::abs(alpha(j)))) {
        // Invariant subspace found; restart in the orthogonal complement.
        beta(j) = 0.0;
        if (j + 1 >= free_dim) {
          m = j + 1;
          break;
        }
        basis.col(j + 1) = fresh_vector(j + 1);
      } else {
        beta(j) = b;
        basis.col(j + 1) = w / b;
      }
    }

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      t(j, j) = alpha(j);
      if (j + 1 < m) t(j, j + 1) = t(j + 1, j) = beta(j);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
    const auto order = select_order(solver.eigenvalues(), end);
    const double tail = m < free_dim ? beta(m - 1) : 0.0;

    worst = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const Eigen::Index c = order[i];
      const double lambda = solver.eigenvalues()(c);
      const double residual = std::abs(tail * solver.eigenvectors()(m - 1, c));
      worst = std::max(worst, residual / std::max(1.0, std::abs(lambda)));
    }
    if (worst <= options.tolerance || m >= free_dim) {
      EigenPairs out;
      out.values.resize(static_cast<Eigen::Index>(k));
      out.vectors.resize(n, static_cast<Eigen::Index>(k));
      for (std::size_t i = 0; i < k; ++i) {
        const Eigen::Index c = order[i];
        out.values(static_cast<Eigen::Index>(i)) = solver.eigenvalues()(c);
        Eigen::VectorXd v = basis.leftCols(m) * solver.eigenvectors().col(c);
        out.vectors.col(static_cast<Eigen::Index>(i)) = v / v.norm();
      }
      return out;
    }
    if (steps >= free_dim) break;
    steps = std::min(free_dim, 2 * steps);
  }
  throw Error("Lanczos did not converge: relative residual " + std::to_string(worst));
}

}  // namespace

EigenPairs symmetric_eigs(const SparseMatrix& a, std::size_t k, SpectrumEnd end,
                          const Eigen::MatrixXd& deflate, const EigenOptions& options) {
  if (a.rows() != a.cols()) throw Error("eigensolver: matrix is not square");
  if (deflate.cols() > 0 && deflate.rows() != a.rows()) throw Error("eigensolver: deflation basis has wrong size");
  const auto available = static_cast<std::size_t>(a.rows() - deflate.cols());
  if (k > available)
    throw Error("eigensolver: requested " + std::to_string(k) + " eigenpairs, only " +
                std::to_string(available) + " available");
  if (k == 0) return {Eigen::VectorXd(0), Eigen::MatrixXd(a.rows(), 0)};
  if (static_cast<std::size_t>(a.rows()) <= options.dense_limit) return dense_eigs(a, k, end, deflate);
  return lanczos_eigs(a, k, end, deflate, options);
}

void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      // Treat entries within rounding of the max as ties so the choice is stable.
      const double mag = std::abs(vectors(r, c));
      if (mag > best * (1.0 + 1e-9) + 1e-300) {
        best = mag;
        arg = r;
      }
    }
    if (vectors(arg, c) < 0.0) vectors.col(c) *= -1.0;
  }
}

}  // namespace bigeo
