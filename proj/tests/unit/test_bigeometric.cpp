#include <doctest.h>

#include <random>

#include "bigeo/bigeometric.hpp"
#include "bigeo/error.hpp"
#include "support/oracles.hpp"

using namespace bigeo;

namespace {

/// Two point clusters that respond in opposite directions on two feature blocks.
DataMatrix block_data(std::uint64_t seed, std::vector<std::size_t>& truth) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  const int n = 60, m = 16;
  DataMatrix d;
  d.values.resize(n, m);
  truth.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    truth[static_cast<std::size_t>(i)] = i < n / 2 ? 0 : 1;
    for (int j = 0; j < m; ++j) {
      const double sign = (i < n / 2) == (j < m / 2) ? 1.0 : -1.0;
      d.values(i, j) = sign + g(rng);
    }
    d.point_ids.push_back("p" + std::to_string(i));
  }
  for (int j = 0; j < m; ++j) d.feature_ids.push_back("q" + std::to_string(j));
  return d;
}

}  // namespace

TEST_CASE("n_iter = 0 stops after the feature organization") {
  std::vector<std::size_t> truth;
  const auto d = block_data(1, truth);
  OrganizeConfig cfg;
  cfg.n_iter = 0;
  const auto state = bigeometric_organize(d, cfg);
  CHECK_FALSE(state.point_tree.has_value());
  CHECK_FALSE(state.point_embedding.has_value());
  CHECK(state.iterations == 0);
  CHECK(state.feature_tree.element_count() == 16);
}

TEST_CASE("planted point clusters appear at level 2 of the point tree") {
  std::vector<std::size_t> truth;
  const auto d = block_data(2, truth);
  OrganizeConfig cfg;
  cfg.seed = 9;
  const auto state = bigeometric_organize(d, cfg);
  REQUIRE(state.point_tree.has_value());
  CHECK(state.iterations == 3);
  CHECK(state.stability_trace.size() == 2);
  const auto& tree = *state.point_tree;
  std::vector<std::size_t> found(60);
  for (std::size_t i = 0; i < 60; ++i) found[i] = tree.folder_of(2, i);
  CHECK(adjusted_rand_index(truth, found) == doctest::Approx(1.0));
  const auto metric = state.point_metric();
  CHECK(metric.rows() == 60);
  CHECK(metric(0, 0) == 0.0);
}

TEST_CASE("organization is deterministic for a fixed seed") {
  std::vector<std::size_t> truth;
  const auto d = block_data(3, truth);
  OrganizeConfig cfg;
  cfg.seed = 5;
  const auto a = bigeometric_organize(d, cfg);
  const auto b = bigeometric_organize(d, cfg);
  CHECK(a.point_tree->fingerprint() == b.point_tree->fingerprint());
  CHECK(a.feature_tree.fingerprint() == b.feature_tree.fingerprint());
  CHECK(a.point_embedding->coords == b.point_embedding->coords);
  CHECK(a.stability_trace == b.stability_trace);
}

TEST_CASE("stability tolerance stops early") {
  std::vector<std::size_t> truth;
  const auto d = block_data(4, truth);
  OrganizeConfig cfg;
  cfg.n_iter = 6;
  cfg.stability_tol = 0.5;
  const auto state = bigeometric_organize(d, cfg);
  CHECK(state.iterations < 6);
  CHECK(state.stability >= 0.5);
}

TEST_CASE("adjusted Rand index against pair counting") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 10 + rng() % 50;
    std::vector<std::size_t> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng() % 4;
      b[i] = trial % 2 ? a[i] : rng() % 3;
    }
    CHECK(adjusted_rand_index(a, b) == doctest::Approx(oracle::pair_counting_ari(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("adjusted Rand index reference behaviour") {
  std::vector<std::size_t> a(1000), b(1000);
  std::mt19937_64 rng(8);
  for (std::size_t i = 0; i < 1000; ++i) {
    a[i] = rng() % 2;
    b[i] = rng() % 2;
  }
  CHECK(std::abs(adjusted_rand_index(a, b)) < 0.1);
  std::vector<std::size_t> halves(1000), moved(1000);
  for (std::size_t i = 0; i < 1000; ++i) halves[i] = moved[i] = i < 500 ? 0 : 1;
  moved[0] = 1;
  CHECK(adjusted_rand_index(halves, moved) > 0.99);
  CHECK(adjusted_rand_index(halves, halves) == 1.0);
}

TEST_CASE("config JSON round trip") {
  OrganizeConfig cfg;
  cfg.point_dims = 5;
  cfg.stability_tol = 0.01;
  cfg.feature_sigma = 1.5;
  cfg.point_emd.levels = {2, 3};
  const auto back = organize_config_from_json(organize_config_json(cfg));
  CHECK(back.point_dims == 5);
  CHECK(back.stability_tol == 0.01);
  CHECK(back.feature_sigma == 1.5);
  CHECK_FALSE(back.point_epsilon.has_value());
  CHECK(back.point_emd.levels == std::vector<std::size_t>{2, 3});
  CHECK(organize_config_json(back) == organize_config_json(cfg));
}

TEST_CASE("tree stability needs trees over the same elements") {
  Eigen::MatrixXd a(4, 1), b(5, 1);
  a << 0, 1, 5, 6;
  b << 0, 1, 5, 6, 7;
  const auto ta = build_tree(a), tb = build_tree(b);
  CHECK(tree_stability(ta, ta) == 1.0);
  CHECK_THROWS(tree_stability(ta, tb));
}
