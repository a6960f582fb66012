#include "bigeo/bigeometric.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "bigeo/error.hpp"
#include "bigeo/random.hpp"

namespace bigeo {

namespace {

struct Organized {
  DiffusionEmbedding embedding;
  PartitionTree tree;
};

Organized organize_from_distances(const Eigen::MatrixXd& distances, std::optional<double> epsilon, std::size_t knn,
                                  std::size_t dims, const OrganizeConfig& config, std::optional<double> radius,
                                  std::uint64_t seed, const std::string& stage) {
  if (!distances.allFinite()) throw Error(stage + ": non-finite tree-EMD distances");
  const auto kernel = knn_sparsify(emd_affinity(distances, epsilon), knn);
  const auto markov = markov_normalize(kernel);
  auto embedding = spectral_embed(markov, dims, config.diffusion_time);
  if (!embedding.coords.allFinite()) throw Error(stage + ": non-finite embedding");
  auto tree = build_tree(embedding.coords, {radius, config.merge_factor, seed});
  return {std::move(embedding), std::move(tree)};
}

Organized initial_features(const DataMatrix& matrix, const OrganizeConfig& config) {
  const Eigen::MatrixXd features = matrix.values.transpose();
  const std::size_t m = matrix.cols();
  const std::size_t knn = std::min(config.feature_knn, m - 1);
  const auto kernel = build_affinity(features, config.feature_sigma, knn);
  auto embedding = spectral_embed(markov_normalize(kernel), config.feature_dims, config.diffusion_time);
  auto tree = build_tree(embedding.coords, {config.feature_radius, config.merge_factor, derive_seed(config.seed, 0)});
  return {std::move(embedding), std::move(tree)};
}

}  // namespace

Eigen::MatrixXd OrganizationState::point_metric() const {
  if (!point_embedding) throw Error("organization has no point embedding (n_iter = 0)");
  return pairwise_distances(point_embedding->coords);
}

OrganizationState bigeometric_organize(const DataMatrix& matrix, const OrganizeConfig& config) {
  if (matrix.rows() < 2 || matrix.cols() < 2) throw Error("organize: need at least 2 points and 2 features");
  if (matrix.has_missing() || !matrix.values.allFinite()) throw Error("organize: matrix has missing or non-finite values");

  auto features = initial_features(matrix, config);
  OrganizationState state{std::move(features.embedding), std::move(features.tree), std::nullopt, std::nullopt, 0, {}, 0.0};

  const Eigen::MatrixXd transposed = matrix.values.transpose();
  for (std::size_t it = 1; it <= config.n_iter; ++it) {
    const std::string stage = "organize iteration " + std::to_string(it);
    const auto point_distances = pairwise_point_emd(matrix.values, state.feature_tree, config.point_emd);
    auto points = organize_from_distances(point_distances, config.point_epsilon, config.point_knn, config.point_dims,
                                          config, config.point_radius, derive_seed(config.seed, 2 * it - 1),
                                          stage + " (points)");
    if (state.point_tree) {
      state.stability = tree_stability(*state.point_tree, points.tree);
      state.stability_trace.push_back(state.stability);
    }
    state.point_embedding = std::move(points.embedding);
    state.point_tree = std::move(points.tree);
    state.iterations = it;

    if (config.stability_tol && !state.stability_trace.empty() && state.stability >= 1.0 - *config.stability_tol)
      break;
    if (it == config.n_iter) break;

    const auto feature_distances = pairwise_point_emd(transposed, *state.point_tree, config.feature_emd);
    auto feats = organize_from_distances(feature_distances, config.feature_epsilon, config.feature_emd_knn,
                                         config.feature_dims, config, config.feature_radius,
                                         derive_seed(config.seed, 2 * it), stage + " (features)");
    state.feature_embedding = std::move(feats.embedding);
    state.feature_tree = std::move(feats.tree);
  }
  return state;
}

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw Error("adjusted_rand_index: labelings have different lengths");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::map<std::size_t, double> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, count] : table) index += choose2(count);
  for (const auto& [key, count] : rows) sum_a += choose2(count);
  for (const auto& [key, count] : cols) sum_b += choose2(count);
  const double total = choose2(static_cast<double>(n));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return rows.size() == table.size() && cols.size() == table.size() ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

double tree_stability(const PartitionTree& previous, const PartitionTree& next) {
  if (previous.element_count() != next.element_count())
    throw Error("tree_stability: trees cover " + std::to_string(previous.element_count()) + " and " +
                std::to_string(next.element_count()) + " elements");
  const std::size_t n = previous.element_count();
  std::vector<std::size_t> a(n), b(n);
  const std::size_t la = std::min<std::size_t>(2, previous.level_count());
  const std::size_t lb = std::min<std::size_t>(2, next.level_count());
  for (std::size_t e = 0; e < n; ++e) {
    a[e] = previous.folder_of(la, e);
    b[e] = next.folder_of(lb, e);
  }
  return std::clamp(adjusted_rand_index(a, b), 0.0, 1.0);
}

namespace {

nlohmann::json emd_json(const EmdParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"levels", p.levels}};
}

EmdParams emd_from_json(const nlohmann::json& j, EmdParams fallback) {
  fallback.alpha = j.value("alpha", fallback.alpha);
  fallback.beta = j.value("beta", fallback.beta);
  if (j.contains("levels")) fallback.levels = j.at("levels").get<std::vector<std::size_t>>();
  return fallback;
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const nlohmann::json& j, const char* key, std::optional<T> fallback) {
  if (!j.contains(key)) return fallback;
  if (j.at(key).is_null() || (j.at(key).is_string() && j.at(key) == "median-heuristic") ||
      (j.at(key).is_string() && j.at(key) == "auto"))
    return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

nlohmann::json organize_config_json(const OrganizeConfig& c) {
  return {
      {"point_dims", c.point_dims},
      {"feature_dims", c.feature_dims},
      {"point_emd", emd_json(c.point_emd)},
      {"feature_emd", emd_json(c.feature_emd)},
      {"n_iter", c.n_iter},
      {"stability_tol", optional_json(c.stability_tol)},
      {"feature_knn", c.feature_knn},
      {"point_knn", c.point_knn},
      {"feature_emd_knn", c.feature_emd_knn},
      {"feature_sigma", optional_json(c.feature_sigma)},
      {"point_epsilon", optional_json(c.point_epsilon)},
      {"feature_epsilon", optional_json(c.feature_epsilon)},
      {"diffusion_time", c.diffusion_time},
      {"merge_factor", c.merge_factor},
      {"point_radius", optional_json(c.point_radius)},
      {"feature_radius", optional_json(c.feature_radius)},
      {"seed", c.seed},
  };
}

OrganizeConfig organize_config_from_json(const nlohmann::json& j) {
  OrganizeConfig c;
  c.point_dims = j.value("point_dims", c.point_dims);
  c.feature_dims = j.value("feature_dims", c.feature_dims);
  if (j.contains("point_emd")) c.point_emd = emd_from_json(j.at("point_emd"), c.point_emd);
  if (j.contains("feature_emd")) c.feature_emd = emd_from_json(j.at("feature_emd"), c.feature_emd);
  c.n_iter = j.value("n_iter", c.n_iter);
  c.stability_tol = optional_from<double>(j, "stability_tol", c.stability_tol);
  c.feature_knn = j.value("feature_knn", c.feature_knn);
  c.point_knn = j.value("point_knn", c.point_knn);
  c.feature_emd_knn = j.value("feature_emd_knn", c.feature_emd_knn);
  c.feature_sigma = optional_from<double>(j, "feature_sigma", c.feature_sigma);
  c.point_epsilon = optional_from<double>(j, "point_epsilon", c.point_epsilon);
  c.feature_epsilon = optional_from<double>(j, "feature_epsilon", c.feature_epsilon);
  c.diffusion_time = j.value("diffusion_time", c.diffusion_time);
  c.merge_factor = j.value("merge_factor", c.merge_factor);
  c.point_radius = optional_from<double>(j, "point_radius", c.point_radius);
  c.feature_radius = optional_from<double>(j, "feature_radius", c.feature_radius);
  c.seed = j.value("seed", c.seed);
  return c;
}

}  // namespace bigeo
