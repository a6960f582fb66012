#include "bigeo/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "bigeo/error.hpp"
#include "bigeo/parallel.hpp"

namespace bigeo {

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ui) {
    const auto i = static_cast<Eigen::Index>(ui);
    for (Eigen::Index j = i + 1; j < n; ++j) dist(i, j) = (points.row(i) - points.row(j)).norm();
  });
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) dist(j, i) = dist(i, j);
  return dist;
}

AffinityMatrix build_affinity(const Eigen::MatrixXd& points, std::optional<double> sigma,
                              std::size_t knn) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n < 2) throw Error("affinity: need at least 2 points");
  if (knn >= n) throw Error("affinity: knn must be smaller than the number of points");
  if (sigma && !(*sigma > 0.0)) throw Error("affinity: bandwidth must be positive");

  const Eigen::MatrixXd dist = pairwise_distances(points);
  const bool dense = knn == 0 || knn == n - 1;

  // keep(i, j) for i < j.
  std::vector<std::vector<std::size_t>> neighbours(n);
  if (!dense) {
    parallel_for(n, [&](std::size_t i) {
      std::vector<std::size_t> order;
      order.reserve(n - 1);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) order.push_back(j);
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(knn), order.end(),
                        [&](std::size_t a, std::size_t b) {
                          const double da = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
                          const double db = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
                          return da < db || (da == db && a < b);
                        });
      order.resize(knn);
      neighbours[i] = std::move(order);
    });
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (dense) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j : neighbours[i]) pairs.emplace_back(std::min(i, j), std::max(i, j));
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  }

  double bandwidth = 0.0;
  if (sigma) {
    bandwidth = *sigma;
  } else {
    std::vector<double> kept;
    kept.reserve(pairs.size());
    for (auto [i, j] : pairs) kept.push_back(dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    auto mid = kept.begin() + static_cast<std::ptrdiff_t>(kept.size() / 2);
    std::nth_element(kept.begin(), mid, kept.end());
    bandwidth = *mid;
    if (!(bandwidth > 0.0)) {
      // Duplicated points push the median to zero; fall back to the positive distances.
      std::vector<double> positive;
      for (double d : kept)
        if (d > 0.0) positive.push_back(d);
      if (positive.empty()) throw Error("degenerate bandwidth: all points are identical");
      auto pmid = positive.begin() + static_cast<std::ptrdiff_t>(positive.size() / 2);
      std::nth_element(positive.begin(), pmid, positive.end());
      bandwidth = *pmid;
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * pairs.size() + n);
  const double scale = 1.0 / (2.0 * bandwidth * bandwidth);
  for (std::size_t i = 0; i < n; ++i)
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
  for (auto [i, j] : pairs) {
    const double d = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const double w = std::exp(-d * d * scale);
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
    triplets.emplace_back(static_cast<int>(j), static_cast<int>(i), w);
  }

  AffinityMatrix out;
  out.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  out.entries.setFromTriplets(triplets.begin(), triplets.end());
  out.bandwidth = bandwidth;
  out.knn = dense ? 0 : knn;
  return out;
}

MarkovOperator::MarkovOperator(const AffinityMatrix& kernel) {
  const auto& k = kernel.entries;
  const Eigen::Index n = k.rows();
  if (k.cols() != n) throw Error("markov: kernel is not square");
  degrees_ = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (SparseMatrix::InnerIterator it(k, i); it; ++it) {
      if (it.value() < 0.0 || !std::isfinite(it.value()))
        throw Error("markov: kernel entry at (" + std::to_string(i) + ", " + std::to_string(it.col()) +
                    ") is negative or non-finite");
      degrees_(i) += it.value();
    }
    if (!(degrees_(i) > 0.0)) throw Error("markov: point " + std::to_string(i) + " has zero row sum");
  }
  const Eigen::VectorXd inv = degrees_.cwiseInverse();
  const Eigen::VectorXd inv_sqrt = degrees_.cwiseSqrt().cwiseInverse();
  transition_ = inv.asDiagonal() * k;
  symmetric_ = inv_sqrt.asDiagonal() * k * inv_sqrt.asDiagonal();
  // Renormalize rows exactly so sums are 1 to rounding of a single division.
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(transition_, i); it; ++it) sum += it.value();
    for (SparseMatrix::InnerIterator it(transition_, i); it; ++it) it.valueRef() /= sum;
  }
}

MarkovOperator markov_normalize(const AffinityMatrix& kernel) { return MarkovOperator(kernel); }

DiffusionEmbedding spectral_embed(const MarkovOperator& markov, std::size_t dims, unsigned t,
                                  const EigenOptions& options) {
  const std::size_t n = markov.size();
  if (dims + 1 > n)
    throw Error("spectral_embed: dimension " + std::to_string(dims) + " exceeds n - 1 = " + std::to_string(n - 1));

  const Eigen::VectorXd pi = markov.stationary();
  const Eigen::VectorXd sqrt_pi = pi.cwiseSqrt();
  // sqrt(pi) is the unit eigenvector of the symmetric conjugate for eigenvalue 1.
  const Eigen::MatrixXd trivial = sqrt_pi / sqrt_pi.norm();
  EigenPairs pairs = symmetric_eigs(markov.symmetric(), dims, SpectrumEnd::largest_magnitude, trivial, options);

  DiffusionEmbedding out;
  out.t = t;
  out.eigenvalues = pairs.values;
  Eigen::MatrixXd phi = sqrt_pi.cwiseInverse().asDiagonal() * pairs.vectors;
  fix_signs(phi);
  out.coords.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(dims); ++j) {
    const double lambda = pairs.values(j);
    out.coords.col(j) = std::pow(lambda, static_cast<double>(t)) * phi.col(j);
  }
  return out;
}

double embed_distance(const DiffusionEmbedding& embedding, std::size_t i, std::size_t j) {
  return (embedding.coords.row(static_cast<Eigen::Index>(i)) - embedding.coords.row(static_cast<Eigen::Index>(j)))
      .norm();
}

nlohmann::json eigenvalues_json(const DiffusionEmbedding& embedding) {
  nlohmann::json j;
  j["t"] = embedding.t;
  j["eigenvalues"] = std::vector<double>(embedding.eigenvalues.data(),
                                         embedding.eigenvalues.data() + embedding.eigenvalues.size());
  return j;
}

}  // namespace bigeo

namespace bigeo {

AffinityMatrix knn_sparsify(const AffinityMatrix& kernel, std::size_t knn) {
  const auto n = kernel.size();
  if (knn == 0 || knn + 1 >= n) return kernel;
  std::vector<std::vector<std::pair<std::size_t, double>>> keep(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<std::size_t, double>> row;
    for (SparseMatrix::InnerIterator it(kernel.entries, static_cast<Eigen::Index>(i)); it; ++it)
      if (static_cast<std::size_t>(it.col()) != i) row.emplace_back(static_cast<std::size_t>(it.col()), it.value());
    const auto take = std::min(knn, row.size());
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(take), row.end(),
                      [](const auto& a, const auto& b) { return a.second > b.second || (a.second == b.second && a.first < b.first); });
    row.resize(take);
    keep[i] = std::move(row);
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < n; ++i) {
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(i),
                          kernel.entries.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
    for (auto [j, w] : keep[i]) {
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
      triplets.emplace_back(static_cast<int>(j), static_cast<int>(i), w);
    }
  }
  AffinityMatrix out;
  out.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  // Duplicates (pairs kept from both ends) are collapsed by max, not summed.
  out.entries.setFromTriplets(triplets.begin(), triplets.end(), [](double a, double b) { return std::max(a, b); });
  out.bandwidth = kernel.bandwidth;
  out.knn = knn;
  return out;
}

}  // namespace bigeo
