#include "bigeo/class_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bigeo/error.hpp"
#include "bigeo/parallel.hpp"
#include "bigeo/random.hpp"
#include "bigeo/tree_emd.hpp"

namespace bigeo {

AffinityMatrix class_affinity(const Eigen::MatrixXd& distances, std::optional<double> sigma) {
  const Eigen::Index c = distances.rows();
  if (distances.cols() != c) throw Error("class_affinity: distance matrix is not square");
  for (Eigen::Index i = 0; i < c; ++i) {
    if (distances(i, i) != 0.0) throw Error("class_affinity: nonzero diagonal");
    for (Eigen::Index j = i + 1; j < c; ++j)
      if (std::abs(distances(i, j) - distances(j, i)) > 1e-12 * std::max(1.0, std::abs(distances(i, j))))
        throw Error("class_affinity: distances are not symmetric");
  }
  if (sigma && !(*sigma > 0.0)) throw Error("class_affinity: sigma must be positive");
  return emd_affinity(distances, sigma);
}

ClassEmbedding class_embed(const AffinityMatrix& kernel, std::size_t dims, ClassKernelMode mode) {
  const std::size_t c = kernel.size();
  if (dims + 1 > c && !(c == 1 && dims == 0))
    throw Error("class_embed: dimension " + std::to_string(dims) + " exceeds C - 1 = " + std::to_string(c - 1));
  ClassEmbedding out;
  out.sigma = kernel.bandwidth;
  EigenPairs pairs;
  if (mode == ClassKernelMode::direct) {
    pairs = symmetric_eigs(kernel.entries, dims, SpectrumEnd::largest_algebraic, Eigen::MatrixXd(c, 0));
  } else {
    const auto markov = markov_normalize(kernel);
    const Eigen::VectorXd root = markov.degrees().cwiseSqrt();
    pairs = symmetric_eigs(markov.symmetric(), dims, SpectrumEnd::largest_algebraic,
                           Eigen::MatrixXd(root / root.norm()));
  }
  out.eigenvalues = pairs.values;
  out.coords = std::move(pairs.vectors);
  fix_signs(out.coords);
  return out;
}

Eigen::MatrixXd embedding_kernel(const Eigen::MatrixXd& coords, double sigma) {
  if (!(sigma > 0.0)) throw Error("embedding_kernel: sigma must be positive");
  const Eigen::Index c = coords.rows();
  Eigen::MatrixXd k(c, c);
  const double inv = 1.0 / (sigma * sigma);
  for (Eigen::Index i = 0; i < c; ++i)
    for (Eigen::Index j = 0; j < c; ++j) k(i, j) = std::exp(-(coords.row(i) - coords.row(j)).squaredNorm() * inv);
  for (Eigen::Index i = 0; i < c; ++i) k.row(i) /= k.row(i).sum();
  return k;
}

double prediction_error(const Eigen::VectorXd& f, const Eigen::MatrixXd& kernel) {
  if (kernel.rows() != f.size() || kernel.cols() != f.size()) throw Error("prediction_error: size mismatch");
  const double norm = f.norm();
  if (!(norm > 0.0)) throw Error("prediction_error: covariate is the zero vector");
  return (f - kernel * f).norm() / norm;
}

ValidationReport permutation_test(const Eigen::VectorXd& f, const Eigen::MatrixXd& kernel, std::size_t n_perm,
                                  std::uint64_t seed, std::string covariate, std::vector<std::string> class_ids) {
  if (n_perm == 0) throw Error("permutation_test: n_perm must be at least 1");
  if (!class_ids.empty() && class_ids.size() != static_cast<std::size_t>(f.size()))
    throw Error("permutation_test: class id count does not match the covariate");
  ValidationReport report;
  report.covariate = std::move(covariate);
  report.class_ids = std::move(class_ids);
  report.values = f;
  report.true_error = prediction_error(f, kernel);
  report.residuals = f - kernel * f;
  report.null_errors.assign(n_perm, 0.0);

  const auto c = static_cast<std::size_t>(f.size());
  parallel_for(n_perm, [&](std::size_t r) {
    Rng rng(derive_seed(seed, r));
    std::vector<std::size_t> perm(c);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    shuffle(perm, rng);
    Eigen::VectorXd permuted(f.size());
    for (std::size_t i = 0; i < c; ++i) permuted(static_cast<Eigen::Index>(i)) = f(static_cast<Eigen::Index>(perm[i]));
    report.null_errors[r] = prediction_error(permuted, kernel);
  });
  std::size_t at_most = 0;
  for (double e : report.null_errors)
    if (e <= report.true_error) ++at_most;
  report.p_value = static_cast<double>(1 + at_most) / static_cast<double>(1 + n_perm);
  return report;
}

OutlierList residual_outliers(const ValidationReport& report, std::size_t top_k) {
  const auto c = static_cast<std::size_t>(report.residuals.size());
  OutlierList out;
  if (top_k > c) {
    out.clamped = true;
    top_k = c;
  }
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = std::abs(report.residuals(static_cast<Eigen::Index>(a)));
    const double rb = std::abs(report.residuals(static_cast<Eigen::Index>(b)));
    if (ra != rb) return ra > rb;
    if (!report.class_ids.empty()) return report.class_ids[a] < report.class_ids[b];
    return a < b;
  });
  order.resize(top_k);
  out.classes = std::move(order);
  return out;
}

nlohmann::json report_json(const ValidationReport& report, std::size_t histogram_bins, std::size_t top_k) {
  nlohmann::json j;
  if (histogram_bins == 0) throw Error("report_json: histogram needs at least one bin");
  j["covariate"] = report.covariate;
  j["true_error"] = report.true_error;
  j["p_value"] = report.p_value;
  j["n_perm"] = report.null_errors.size();

  const auto [lo_it, hi_it] = std::minmax_element(report.null_errors.begin(), report.null_errors.end());
  const double lo = std::min(*lo_it, report.true_error);
  const double hi = std::max(*hi_it, report.true_error);
  std::vector<std::size_t> counts(histogram_bins, 0);
  const double width = hi > lo ? (hi - lo) / static_cast<double>(histogram_bins) : 1.0;
  for (double e : report.null_errors) {
    auto bin = static_cast<std::size_t>((e - lo) / width);
    counts[std::min(bin, histogram_bins - 1)] += 1;
  }
  j["null_histogram"] = {{"min", lo}, {"max", hi}, {"counts", counts}};

  nlohmann::json residuals = nlohmann::json::array();
  for (Eigen::Index i = 0; i < report.residuals.size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    residuals.push_back({{"class_id", report.class_ids.empty() ? std::to_string(idx) : report.class_ids[idx]},
                         {"value", report.values(i)},
                         {"residual", report.residuals(i)}});
  }
  j["residuals"] = std::move(residuals);
  const auto outliers = residual_outliers(report, top_k);
  nlohmann::json top = nlohmann::json::array();
  for (std::size_t idx : outliers.classes)
    top.push_back(report.class_ids.empty() ? std::to_string(idx) : report.class_ids[idx]);
  j["top_outliers"] = std::move(top);
  return j;
}

}  // namespace bigeo
