#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <numeric>
#include <set>

#include "bigeo/error.hpp"
#include "bigeo/partition_tree.hpp"

using namespace bigeo;

namespace {

Folder folder(std::vector<std::size_t> members) {
  Folder f;
  f.members = std::move(members);
  return f;
}

Eigen::MatrixXd random_points(int n, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd p(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) p(i, j) = g(rng);
  return p;
}

}  // namespace

TEST_CASE("two tight pairs give levels of sizes 1, 2, 4") {
  Eigen::MatrixXd p(4, 1);
  p << 0.0, 0.1, 10.0, 10.1;
  TreeOptions opts;
  opts.base_radius = 0.5;
  const auto tree = build_tree(p, opts);
  REQUIRE(tree.level_count() == 3);
  CHECK(tree.level(1).size() == 1);
  CHECK(tree.level(2).size() == 2);
  CHECK(tree.level(3).size() == 4);
  CHECK(tree.level(2)[0].members == std::vector<std::size_t>{0, 1});
  CHECK(tree.folder_of(2, 3) == 1);
}

TEST_CASE("repeated point gives a two-level tree") {
  const Eigen::MatrixXd p = Eigen::MatrixXd::Constant(6, 2, 3.0);
  const auto tree = build_tree(p);
  CHECK(tree.level_count() == 2);
  CHECK(tree.level(2).size() == 6);
}

TEST_CASE("a single element is below the minimum size") {
  CHECK_THROWS_AS(build_tree(Eigen::MatrixXd::Zero(1, 2)), Error);
}

TEST_CASE("builds are deterministic per seed") {
  const auto p = random_points(80, 3, 1);
  TreeOptions opts;
  opts.seed = 42;
  CHECK(build_tree(p, opts).fingerprint() == build_tree(p, opts).fingerprint());
}

TEST_CASE("random builds satisfy every structural invariant") {
  std::mt19937_64 rng(3);
  for (std::uint64_t s = 0; s < 40; ++s) {
    const int n = 2 + static_cast<int>(rng() % 60);
    const auto p = random_points(n, 1 + static_cast<int>(s % 4), s);
    TreeOptions opts;
    opts.seed = s;
    opts.merge_factor = 1.5 + static_cast<double>(s % 3);
    const auto tree = build_tree(p, opts);
    tree.check_invariants();
    CHECK(tree.level(1).size() == 1);
    CHECK(tree.level(tree.level_count()).size() == static_cast<std::size_t>(n));
    for (std::size_t l = 1; l <= tree.level_count(); ++l) {
      std::set<std::size_t> seen;
      for (const auto& f : tree.level(l))
        for (auto m : f.members) CHECK(seen.insert(m).second);
      CHECK(seen.size() == static_cast<std::size_t>(n));
    }
    const auto w = folder_weights(tree);
    for (const auto& level : w.gamma) CHECK(std::accumulate(level.begin(), level.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("folder weights") {
  std::vector<std::vector<Folder>> levels(3);
  std::vector<std::size_t> all(10);
  std::iota(all.begin(), all.end(), std::size_t{0});
  levels[0] = {folder(all)};
  levels[1] = {folder({0, 1, 2}), folder({3, 4, 5, 6, 7, 8, 9})};
  for (std::size_t i = 0; i < 10; ++i) levels[2].push_back(folder({i}));
  const PartitionTree tree(levels);
  const auto w = folder_weights(tree);
  CHECK(w.gamma[0][0] == 1.0);
  CHECK(w.gamma[1][0] == doctest::Approx(0.3));
  CHECK(w.gamma[1][1] == doctest::Approx(0.7));
  CHECK(w.gamma[2][4] == doctest::Approx(0.1));
  CHECK(tree.level(1)[0].children == std::vector<std::size_t>{0, 1});
  CHECK(tree.level(2)[1].parent == 0);
}

TEST_CASE("malformed trees are rejected") {
  std::vector<std::vector<Folder>> overlap{{folder({0, 1, 2})}, {folder({0, 1}), folder({1, 2})}, {folder({0}), folder({1}), folder({2})}};
  CHECK_THROWS_AS(PartitionTree{overlap}, Error);
  std::vector<std::vector<Folder>> gap{{folder({0, 1, 2})}, {folder({0, 1})}, {folder({0}), folder({1}), folder({2})}};
  CHECK_THROWS_AS(PartitionTree{gap}, Error);
  std::vector<std::vector<Folder>> not_nested{{folder({0, 1, 2, 3})},
                                              {folder({0, 1}), folder({2, 3})},
                                              {folder({0, 2}), folder({1}), folder({3})},
                                              {folder({0}), folder({1}), folder({2}), folder({3})}};
  CHECK_THROWS_AS(PartitionTree{not_nested}, Error);
}

TEST_CASE("JSON round trip preserves structure and ids") {
  const auto p = random_points(30, 2, 8);
  const auto tree = build_tree(p);
  std::vector<std::string> ids;
  for (int i = 0; i < 30; ++i) ids.push_back("p" + std::to_string(i));
  std::vector<std::string> back_ids;
  const auto back = tree_from_json(tree_to_json(tree, ids), &back_ids);
  CHECK(back.fingerprint() == tree.fingerprint());
  CHECK(back_ids == ids);
}

TEST_CASE("base radius defaults to half the median distance") {
  Eigen::MatrixXd p(3, 1);
  p << 0.0, 1.0, 3.0;  // distances 1, 2, 3
  CHECK(resolve_base_radius(p, {}) == doctest::Approx(1.0));
  TreeOptions opts;
  opts.base_radius = 0.25;
  CHECK(resolve_base_radius(p, opts) == 0.25);
}

TEST_CASE("depth is bounded by the radius schedule") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = random_points(50, 2, 300 + s);
    TreeOptions opts;
    opts.seed = s;
    opts.merge_factor = 1.5 + 0.5 * static_cast<double>(s % 3);
    const double eps0 = resolve_base_radius(p, opts);
    double diameter = 0.0;
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j) diameter = std::max(diameter, (p.row(i) - p.row(j)).norm());
    const auto tree = build_tree(p, opts);
    CHECK(static_cast<double>(tree.level_count()) <= 2.0 + std::ceil(std::log(diameter / eps0) / std::log(opts.merge_factor)));
  }
}
