#include "bigeo/tree_emd.hpp"

#include <algorithm>
#include <cmath>

#include "bigeo/error.hpp"
#include "bigeo/parallel.hpp"

namespace bigeo {

namespace {

void require_same_tree(std::uint64_t a, std::uint64_t b, const char* what) {
  if (a != b) throw Error(std::string(what) + ": operands come from different trees");
}

template <typename Delta>
double weighted_l1(const Delta& a, const Delta& b, const FolderWeights& weights, const EmdParams& params) {
  const std::size_t depth = weights.gamma.size();
  if (a.size() != depth || b.size() != depth) throw Error("tree emd: level count mismatch");
  auto level_term = [&](std::size_t level) {
    const auto& g = weights.gamma[level - 1];
    const auto& x = a[level - 1];
    const auto& y = b[level - 1];
    if (x.size() != g.size() || y.size() != g.size()) throw Error("tree emd: folder count mismatch");
    double sum = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
      sum += (params.beta == 1.0 ? g[k] : std::pow(g[k], params.beta)) * std::abs(x[k] - y[k]);
    return std::exp2(params.alpha * static_cast<double>(level)) * sum;
  };
  std::vector<bool> include(depth, params.levels.empty());
  for (std::size_t l : params.levels) {
    if (l == 0 || l > depth) throw Error("tree emd: level " + std::to_string(l) + " out of range");
    include[l - 1] = true;
  }
  double total = 0.0;
  for (std::size_t l = 1; l <= depth; ++l)
    if (include[l - 1]) total += level_term(l);
  return total;
}

}  // namespace

std::vector<std::size_t> interior_levels(const PartitionTree& tree) {
  std::vector<std::size_t> levels;
  for (std::size_t l = 2; l < tree.level_count(); ++l) levels.push_back(l);
  if (levels.empty())
    for (std::size_t l = 2; l <= tree.level_count(); ++l) levels.push_back(l);
  return levels;
}

FolderProfile folder_profile(std::span<const double> point, const PartitionTree& feature_tree) {
  if (point.size() != feature_tree.element_count())
    throw Error("folder_profile: point has " + std::to_string(point.size()) + " entries, tree has " +
                std::to_string(feature_tree.element_count()) + " elements");
  const std::size_t depth = feature_tree.level_count();
  FolderProfile out;
  out.tree_fingerprint = feature_tree.fingerprint();
  out.delta.resize(depth);
  // Sums bottom-up; each folder's sum is the sum over its children.
  std::vector<std::vector<double>> sums(depth);
  const auto& leaves = feature_tree.level(depth);
  sums[depth - 1].resize(leaves.size());
  for (std::size_t k = 0; k < leaves.size(); ++k) sums[depth - 1][k] = point[leaves[k].members.front()];
  for (std::size_t l = depth - 1; l >= 1; --l) {
    const auto& folders = feature_tree.level(l);
    sums[l - 1].assign(folders.size(), 0.0);
    for (std::size_t k = 0; k < folders.size(); ++k)
      for (std::size_t c : folders[k].children) sums[l - 1][k] += sums[l][c];
  }
  for (std::size_t l = 1; l <= depth; ++l) {
    const auto& folders = feature_tree.level(l);
    out.delta[l - 1].resize(folders.size());
    for (std::size_t k = 0; k < folders.size(); ++k)
      out.delta[l - 1][k] = sums[l - 1][k] / static_cast<double>(folders[k].members.size());
  }
  return out;
}

double point_tree_emd(const FolderProfile& a, const FolderProfile& b, const FolderWeights& weights,
                      const EmdParams& params) {
  require_same_tree(a.tree_fingerprint, b.tree_fingerprint, "point_tree_emd");
  require_same_tree(a.tree_fingerprint, weights.tree_fingerprint, "point_tree_emd");
  return weighted_l1(a.delta, b.delta, weights, params);
}

ClassHistogram class_histogram(std::span<const std::size_t> members, const PartitionTree& point_tree) {
  if (members.empty()) throw Error("class_histogram: empty class");
  ClassHistogram out;
  out.tree_fingerprint = point_tree.fingerprint();
  const double mass = 1.0 / static_cast<double>(members.size());
  for (std::size_t l = 1; l <= point_tree.level_count(); ++l) {
    std::vector<double> level(point_tree.level(l).size(), 0.0);
    for (std::size_t e : members) {
      if (e >= point_tree.element_count()) throw Error("class_histogram: member index out of range");
      level[point_tree.folder_of(l, e)] += mass;
    }
    out.delta.push_back(std::move(level));
  }
  return out;
}

double class_tree_emd(const ClassHistogram& a, const ClassHistogram& b, const FolderWeights& weights,
                      const EmdParams& params) {
  require_same_tree(a.tree_fingerprint, b.tree_fingerprint, "class_tree_emd");
  require_same_tree(a.tree_fingerprint, weights.tree_fingerprint, "class_tree_emd");
  return weighted_l1(a.delta, b.delta, weights, params);
}

std::vector<double> folder_coefficients(const FolderWeights& weights, const EmdParams& params) {
  const std::size_t depth = weights.gamma.size();
  std::vector<bool> include(depth, params.levels.empty());
  for (std::size_t l : params.levels) {
    if (l == 0 || l > depth) throw Error("tree emd: level " + std::to_string(l) + " out of range");
    include[l - 1] = true;
  }
  std::vector<double> coeffs;
  for (std::size_t l = 1; l <= depth; ++l) {
    const double scale = std::exp2(params.alpha * static_cast<double>(l));
    for (double g : weights.gamma[l - 1])
      coeffs.push_back(include[l - 1] ? scale * (params.beta == 1.0 ? g : std::pow(g, params.beta)) : 0.0);
  }
  return coeffs;
}

namespace {

// Rows are coefficient-scaled flattened folder vectors restricted to folders
// with a nonzero coefficient; the tree distance is then a plain L1 distance.
Eigen::MatrixXd l1_all_pairs(const Eigen::MatrixXd& rows, const ProgressHook& progress) {
  const Eigen::Index c = rows.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(c, c);
  // Column-major transposed copy: each distance reads two contiguous columns.
  const Eigen::MatrixXd cols = rows.transpose();
  std::size_t done = 0;
  parallel_for(static_cast<std::size_t>(c), [&](std::size_t ui) {
    const auto i = static_cast<Eigen::Index>(ui);
    const double* a = cols.col(i).data();
    for (Eigen::Index j = i + 1; j < c; ++j) {
      const double* b = cols.col(j).data();
      double sum = 0.0;
      for (Eigen::Index f = 0; f < cols.rows(); ++f) sum += std::abs(a[f] - b[f]);
      out(i, j) = sum;
    }
    if (progress && thread_count() == 1) progress(++done, static_cast<std::size_t>(c));
  });
  for (Eigen::Index i = 0; i < c; ++i)
    for (Eigen::Index j = i + 1; j < c; ++j) out(j, i) = out(i, j);
  if (progress && thread_count() > 1) progress(static_cast<std::size_t>(c), static_cast<std::size_t>(c));
  return out;
}

}  // namespace

Eigen::MatrixXd pairwise_class_emd(const std::vector<ClassHistogram>& histograms, const FolderWeights& weights,
                                   const EmdParams& params, const ProgressHook& progress) {
  const std::size_t c = histograms.size();
  if (c == 0) return Eigen::MatrixXd(0, 0);
  for (const auto& h : histograms) {
    require_same_tree(h.tree_fingerprint, weights.tree_fingerprint, "pairwise_class_emd");
    if (h.delta.size() != weights.gamma.size()) throw Error("pairwise_class_emd: level count mismatch");
  }
  const auto coeffs = folder_coefficients(weights, params);
  std::vector<std::size_t> active;
  for (std::size_t f = 0; f < coeffs.size(); ++f)
    if (coeffs[f] != 0.0) active.push_back(f);

  Eigen::MatrixXd rows(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(active.size()));
  for (std::size_t i = 0; i < c; ++i) {
    std::vector<double> flat;
    flat.reserve(coeffs.size());
    for (const auto& level : histograms[i].delta) flat.insert(flat.end(), level.begin(), level.end());
    if (flat.size() != coeffs.size()) throw Error("pairwise_class_emd: folder count mismatch");
    for (std::size_t a = 0; a < active.size(); ++a)
      rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = coeffs[active[a]] * flat[active[a]];
  }
  return l1_all_pairs(rows, progress);
}

Eigen::MatrixXd pairwise_point_emd(const Eigen::MatrixXd& data, const PartitionTree& feature_tree,
                                   const EmdParams& params) {
  if (static_cast<std::size_t>(data.cols()) != feature_tree.element_count())
    throw Error("pairwise_point_emd: data width does not match the feature tree");
  const auto weights = folder_weights(feature_tree);
  const auto coeffs = folder_coefficients(weights, params);
  std::vector<std::size_t> active;
  for (std::size_t f = 0; f < coeffs.size(); ++f)
    if (coeffs[f] != 0.0) active.push_back(f);

  const Eigen::Index n = data.rows();
  Eigen::MatrixXd rows(n, static_cast<Eigen::Index>(active.size()));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ui) {
    const auto i = static_cast<Eigen::Index>(ui);
    const Eigen::VectorXd row = data.row(i).transpose();
    const auto profile = folder_profile(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())),
                                        feature_tree);
    std::vector<double> flat;
    flat.reserve(coeffs.size());
    for (const auto& level : profile.delta) flat.insert(flat.end(), level.begin(), level.end());
    for (std::size_t a = 0; a < active.size(); ++a)
      rows(i, static_cast<Eigen::Index>(a)) = coeffs[active[a]] * flat[active[a]];
  });
  return l1_all_pairs(rows, {});
}

AffinityMatrix emd_affinity(const Eigen::MatrixXd& distances, std::optional<double> epsilon) {
  const Eigen::Index n = distances.rows();
  if (distances.cols() != n) throw Error("emd_affinity: distance matrix is not square");
  double eps = 0.0;
  if (epsilon) {
    if (!(*epsilon > 0.0)) throw Error("emd_affinity: epsilon must be positive");
    eps = *epsilon;
  } else {
    std::vector<double> off;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        if (distances(i, j) > 0.0) off.push_back(distances(i, j));
    if (off.empty()) {
      eps = 1.0;  // all distances zero: every bandwidth yields the all-ones kernel
    } else {
      auto mid = off.begin() + static_cast<std::ptrdiff_t>(off.size() / 2);
      std::nth_element(off.begin(), mid, off.end());
      eps = *mid;
    }
  }
  if (!distances.allFinite()) throw Error("emd_affinity: non-finite distance");
  AffinityMatrix out;
  out.bandwidth = eps;
  out.knn = 0;
  out.entries = (-distances.array() / eps).exp().matrix().sparseView(0.0, 0.0);
  // Exact symmetry and unit diagonal regardless of rounding in the input.
  out.entries = SparseMatrix(0.5 * (SparseMatrix(out.entries) + SparseMatrix(out.entries.transpose())));
  for (Eigen::Index i = 0; i < n; ++i) out.entries.coeffRef(i, i) = 1.0;
  return out;
}

nlohmann::json histogram_json(const ClassHistogram& histogram) {
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t l = 0; l < histogram.delta.size(); ++l) {
    nlohmann::json folders = nlohmann::json::object();
    for (std::size_t k = 0; k < histogram.delta[l].size(); ++k)
      if (histogram.delta[l][k] != 0.0) folders[std::to_string(k)] = histogram.delta[l][k];
    levels.push_back({{"level", l + 1}, {"mass", std::move(folders)}});
  }
  return levels;
}

}  // namespace bigeo
