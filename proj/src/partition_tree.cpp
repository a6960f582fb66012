#include "bigeo/partition_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "bigeo/error.hpp"
#include "bigeo/random.hpp"

namespace bigeo {

namespace {

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xffu;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Cluster {
  std::vector<std::size_t> members;
  Eigen::VectorXd sum;
  bool active = true;

  Eigen::VectorXd centroid() const { return sum / static_cast<double>(members.size()); }
};

// Centroid-linkage agglomeration: repeatedly merge the closest pair while its
// centroid distance is below `radius`. Nearest-neighbour caches keep each merge
// close to O(k) on typical inputs.
std::vector<Cluster> agglomerate(std::vector<Cluster> clusters, double radius) {
  const std::size_t k = clusters.size();
  std::vector<Eigen::VectorXd> centroids(k);
  for (std::size_t i = 0; i < k; ++i) centroids[i] = clusters[i].centroid();

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> nn(k, 0);
  std::vector<double> nnd(k, inf);
  auto refresh = [&](std::size_t i) {
    nnd[i] = inf;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i || !clusters[j].active) continue;
      const double d = (centroids[i] - centroids[j]).norm();
      if (d < nnd[i]) {
        nnd[i] = d;
        nn[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < k; ++i) refresh(i);

  while (true) {
    std::size_t best = k;
    for (std::size_t i = 0; i < k; ++i) {
      if (!clusters[i].active) continue;
      if (best == k || nnd[i] < nnd[best]) best = i;
    }
    if (best == k || !(nnd[best] < radius)) break;
    const std::size_t a = std::min(best, nn[best]);
    const std::size_t b = std::max(best, nn[best]);
    auto& target = clusters[a];
    target.members.insert(target.members.end(), clusters[b].members.begin(), clusters[b].members.end());
    target.sum += clusters[b].sum;
    centroids[a] = target.centroid();
    clusters[b].active = false;
    clusters[b].members.clear();

    refresh(a);
    for (std::size_t c = 0; c < k; ++c) {
      if (!clusters[c].active || c == a) continue;
      if (nn[c] == a || nn[c] == b) {
        refresh(c);
      } else {
        const double d = (centroids[c] - centroids[a]).norm();
        if (d < nnd[c] || (d == nnd[c] && a < nn[c])) {
          nnd[c] = d;
          nn[c] = a;
        }
      }
    }
  }

  std::vector<Cluster> out;
  for (auto& c : clusters)
    if (c.active) out.push_back(std::move(c));
  return out;
}

std::vector<Folder> to_level(const std::vector<Cluster>& clusters) {
  std::vector<Folder> level;
  level.reserve(clusters.size());
  for (const auto& c : clusters) {
    Folder f;
    f.members = c.members;
    std::sort(f.members.begin(), f.members.end());
    level.push_back(std::move(f));
  }
  std::sort(level.begin(), level.end(),
            [](const Folder& x, const Folder& y) { return x.members.front() < y.members.front(); });
  return level;
}

double median_of(std::vector<double> values) {
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

}  // namespace

PartitionTree::PartitionTree(std::vector<std::vector<Folder>> levels) : levels_(std::move(levels)) {
  if (levels_.empty() || levels_.front().size() != 1) throw Error("partition tree: root level must hold one folder");
  element_count_ = levels_.front().front().members.size();
  if (element_count_ == 0) throw Error("partition tree: empty element set");

  assignment_.assign(levels_.size(), std::vector<std::size_t>(element_count_, Folder::kNoParent));
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    for (std::size_t k = 0; k < levels_[l].size(); ++k) {
      auto& folder = levels_[l][k];
      if (folder.members.empty()) throw Error("partition tree: empty folder at level " + std::to_string(l + 1));
      std::sort(folder.members.begin(), folder.members.end());
      folder.children.clear();
      for (std::size_t e : folder.members) {
        if (e >= element_count_ || assignment_[l][e] != Folder::kNoParent)
          throw Error("partition tree: folders at level " + std::to_string(l + 1) + " overlap or exceed the set");
        assignment_[l][e] = k;
      }
    }
    for (std::size_t e = 0; e < element_count_; ++e)
      if (assignment_[l][e] == Folder::kNoParent)
        throw Error("partition tree: level " + std::to_string(l + 1) + " does not cover element " + std::to_string(e));
  }
  for (std::size_t l = 0; l + 1 < levels_.size(); ++l) {
    for (std::size_t k = 0; k < levels_[l + 1].size(); ++k) {
      auto& child = levels_[l + 1][k];
      child.parent = assignment_[l][child.members.front()];
      levels_[l][child.parent].children.push_back(k);
    }
  }
  levels_.front().front().parent = Folder::kNoParent;

  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv_mix(h, element_count_);
  for (const auto& row : assignment_) {
    h = fnv_mix(h, row.size());
    for (std::size_t v : row) h = fnv_mix(h, v);
  }
  fingerprint_ = h;
  check_invariants();
}

const std::vector<Folder>& PartitionTree::level(std::size_t level) const {
  if (level == 0 || level > levels_.size()) throw Error("partition tree: level " + std::to_string(level) + " out of range");
  return levels_[level - 1];
}

std::size_t PartitionTree::folder_of(std::size_t level, std::size_t element) const {
  if (level == 0 || level > levels_.size() || element >= element_count_)
    throw Error("partition tree: folder_of index out of range");
  return assignment_[level - 1][element];
}

std::size_t PartitionTree::total_folders() const {
  std::size_t total = 0;
  for (const auto& l : levels_) total += l.size();
  return total;
}

void PartitionTree::check_invariants() const {
  if (levels_.front().size() != 1 || levels_.front().front().members.size() != element_count_)
    throw Error("partition tree: root does not contain every element");
  if (levels_.back().size() != element_count_)
    throw Error("partition tree: leaf level is not all singletons");
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    std::size_t covered = 0;
    for (const auto& f : levels_[l]) covered += f.members.size();
    if (covered != element_count_) throw Error("partition tree: level " + std::to_string(l + 1) + " is not a partition");
    if (l + 1 == levels_.size()) break;
    for (std::size_t k = 0; k < levels_[l].size(); ++k) {
      const auto& parent = levels_[l][k];
      std::size_t child_total = 0;
      for (std::size_t c : parent.children) {
        const auto& child = levels_[l + 1][c];
        child_total += child.members.size();
        for (std::size_t e : child.members)
          if (assignment_[l][e] != k)
            throw Error("partition tree: child folder escapes its parent at level " + std::to_string(l + 2));
      }
      if (child_total != parent.members.size())
        throw Error("partition tree: folder at level " + std::to_string(l + 1) + " is not the union of its children");
    }
  }
}

double resolve_base_radius(const Eigen::MatrixXd& coords, const TreeOptions& options) {
  if (options.base_radius) {
    if (!(*options.base_radius > 0.0)) throw Error("build_tree: base radius must be positive");
    return *options.base_radius;
  }
  const Eigen::Index n = coords.rows();
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) dists.push_back((coords.row(i) - coords.row(j)).norm());
  double median = median_of(dists);
  if (!(median > 0.0)) {
    std::vector<double> positive;
    for (double d : dists)
      if (d > 0.0) positive.push_back(d);
    if (positive.empty()) return 1.0;  // all points coincide; any radius covers them
    median = median_of(std::move(positive));
  }
  return 0.5 * median;
}

PartitionTree build_tree(const Eigen::MatrixXd& coords, const TreeOptions& options) {
  const auto n = static_cast<std::size_t>(coords.rows());
  if (n < 2) throw Error("build_tree: need at least 2 elements");
  if (!(options.merge_factor > 1.0)) throw Error("build_tree: merge_factor must exceed 1");
  if (!coords.allFinite()) throw Error("build_tree: non-finite coordinates");
  const double eps0 = resolve_base_radius(coords, options);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(options.seed);
  shuffle(order, rng);

  std::vector<std::size_t> cover(n, Folder::kNoParent);
  std::vector<Cluster> clusters;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t centre = order[pos];
    if (cover[centre] != Folder::kNoParent) continue;
    Cluster c;
    c.sum = Eigen::VectorXd::Zero(coords.cols());
    for (std::size_t q = pos; q < n; ++q) {
      const std::size_t e = order[q];
      if (cover[e] != Folder::kNoParent) continue;
      if ((coords.row(static_cast<Eigen::Index>(e)) - coords.row(static_cast<Eigen::Index>(centre))).norm() <= eps0) {
        cover[e] = clusters.size();
        c.members.push_back(e);
        c.sum += coords.row(static_cast<Eigen::Index>(e)).transpose();
      }
    }
    clusters.push_back(std::move(c));
  }

  // Built finest-first, reversed at the end.
  std::vector<std::vector<Folder>> levels;
  std::vector<Folder> leaves(n);
  for (std::size_t e = 0; e < n; ++e) leaves[e].members = {e};
  levels.push_back(std::move(leaves));
  if (clusters.size() < n) levels.push_back(to_level(clusters));

  double radius = eps0;
  while (clusters.size() > 1) {
    radius *= options.merge_factor;
    if (!std::isfinite(radius)) throw Error("build_tree: merge radius overflowed");
    const std::size_t before = clusters.size();
    clusters = agglomerate(std::move(clusters), radius);
    if (clusters.size() < before) levels.push_back(to_level(clusters));
  }

  std::reverse(levels.begin(), levels.end());
  return PartitionTree(std::move(levels));
}

FolderWeights folder_weights(const PartitionTree& tree) {
  FolderWeights w;
  w.tree_fingerprint = tree.fingerprint();
  const double n = static_cast<double>(tree.element_count());
  for (std::size_t l = 1; l <= tree.level_count(); ++l) {
    std::vector<double> gamma;
    gamma.reserve(tree.level(l).size());
    for (const auto& f : tree.level(l)) gamma.push_back(static_cast<double>(f.members.size()) / n);
    w.gamma.push_back(std::move(gamma));
  }
  return w;
}

nlohmann::json tree_to_json(const PartitionTree& tree, const std::vector<std::string>& element_ids) {
  if (element_ids.size() != tree.element_count()) throw Error("tree_to_json: id count does not match the tree");
  nlohmann::json j;
  j["element_count"] = tree.element_count();
  j["element_ids"] = element_ids;
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t l = 1; l <= tree.level_count(); ++l) {
    nlohmann::json folders = nlohmann::json::array();
    for (const auto& f : tree.level(l)) {
      nlohmann::json fj;
      std::vector<std::string> ids;
      ids.reserve(f.members.size());
      for (std::size_t e : f.members) ids.push_back(element_ids[e]);
      fj["members"] = std::move(ids);
      fj["parent"] = f.parent == Folder::kNoParent ? -1 : static_cast<long long>(f.parent);
      folders.push_back(std::move(fj));
    }
    levels.push_back({{"level", l}, {"folders", std::move(folders)}});
  }
  j["levels"] = std::move(levels);
  return j;
}

PartitionTree tree_from_json(const nlohmann::json& j, std::vector<std::string>* element_ids) {
  const auto ids = j.at("element_ids").get<std::vector<std::string>>();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (!index.emplace(ids[i], i).second) throw Error("tree json: duplicate element id '" + ids[i] + "'");
  std::vector<std::vector<Folder>> levels;
  for (const auto& lj : j.at("levels")) {
    std::vector<Folder> level;
    for (const auto& fj : lj.at("folders")) {
      Folder f;
      for (const auto& id : fj.at("members")) {
        auto it = index.find(id.get<std::string>());
        if (it == index.end()) throw Error("tree json: unknown member id");
        f.members.push_back(it->second);
      }
      level.push_back(std::move(f));
    }
    levels.push_back(std::move(level));
  }
  if (element_ids) *element_ids = ids;
  return PartitionTree(std::move(levels));
}

}  // namespace bigeo
