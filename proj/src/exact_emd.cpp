#include "bigeo/exact_emd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bigeo/error.hpp"

namespace bigeo {

namespace {
constexpr double kMassTolerance = 1e-12;
constexpr double kFlowEpsilon = 1e-15;
}  // namespace

TransportInstance TransportInstance::from_points(const Eigen::MatrixXd& points, Eigen::VectorXd p,
                                                 Eigen::VectorXd q, double alpha_ground) {
  if (!(alpha_ground > 0.0 && alpha_ground <= 1.0)) throw Error("transport: alpha_ground must lie in (0, 1]");
  const Eigen::Index s = points.rows();
  TransportInstance inst;
  inst.cost.resize(s, s);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j)
      inst.cost(i, j) = i == j ? 0.0 : std::pow((points.row(i) - points.row(j)).norm(), alpha_ground);
  inst.p = std::move(p);
  inst.q = std::move(q);
  inst.validate();
  return inst;
}

TransportInstance TransportInstance::from_json(const nlohmann::json& j) {
  auto vec = [](const nlohmann::json& a) {
    const auto v = a.get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  auto mat = [](const nlohmann::json& a) {
    const auto rows = a.get<std::vector<std::vector<double>>>();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != static_cast<std::size_t>(m.cols())) throw Error("transport json: ragged matrix");
      for (std::size_t c = 0; c < rows[r].size(); ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return m;
  };
  if (j.contains("cost")) {
    TransportInstance inst;
    inst.cost = mat(j.at("cost"));
    inst.p = vec(j.at("p"));
    inst.q = vec(j.at("q"));
    inst.validate();
    return inst;
  }
  return from_points(mat(j.at("points")), vec(j.at("p")), vec(j.at("q")), j.value("alpha_ground", 1.0));
}

void TransportInstance::validate() const {
  const Eigen::Index s = p.size();
  if (s == 0) throw Error("transport: empty support");
  if (static_cast<std::size_t>(s) > kMaxSupport)
    throw Error("transport: support of " + std::to_string(s) + " exceeds the oracle limit of " + std::to_string(kMaxSupport));
  if (q.size() != s || cost.rows() != s || cost.cols() != s) throw Error("transport: size mismatch");
  if (!cost.allFinite() || !p.allFinite() || !q.allFinite()) throw Error("transport: non-finite input");
  const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < s; ++i) {
    if (cost(i, i) != 0.0) throw Error("transport: nonzero diagonal cost");
    for (Eigen::Index j = 0; j < s; ++j) {
      if (cost(i, j) < 0.0) throw Error("transport: negative cost");
      if (std::abs(cost(i, j) - cost(j, i)) > 1e-12 * scale) throw Error("transport: asymmetric cost");
    }
  }
  if ((p.array() < 0.0).any() || (q.array() < 0.0).any()) throw Error("transport: negative mass");
  if (std::abs(p.sum() - 1.0) > kMassTolerance || std::abs(q.sum() - 1.0) > kMassTolerance)
    throw Error("transport: unbalanced masses (p sums to " + std::to_string(p.sum()) + ", q to " +
                std::to_string(q.sum()) + ")");
}

double exact_emd(const TransportInstance& instance) {
  instance.validate();
  const auto s = static_cast<std::size_t>(instance.p.size());
  const auto& c = instance.cost;
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<double> supply(s), demand(s);
  for (std::size_t i = 0; i < s; ++i) {
    supply[i] = instance.p(static_cast<Eigen::Index>(i));
    demand[i] = instance.q(static_cast<Eigen::Index>(i));
  }
  // Mass that stays in place costs nothing; ship only the difference.
  for (std::size_t i = 0; i < s; ++i) {
    const double stay = std::min(supply[i], demand[i]);
    supply[i] -= stay;
    demand[i] -= stay;
  }

  std::vector<double> flow(s * s, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return flow[i * s + j]; };
  auto cost = [&](std::size_t i, std::size_t j) { return c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); };

  // Node potentials: u for supply side, v for demand side. Reduced costs
  // c(i,j) + u_i - v_j stay nonnegative on residual arcs.
  std::vector<double> u(s, 0.0), v(s, 0.0);
  std::vector<double> dist_s(s), dist_d(s);
  std::vector<std::size_t> pred_d(s), pred_s(s);  // pred_d[j] = supply node, pred_s[i] = demand node
  std::vector<bool> done_s(s), done_d(s);

  auto remaining = [&] {
    double total = 0.0;
    for (double x : supply) total += x;
    return total;
  };

  std::size_t guard = 0;
  while (remaining() > kFlowEpsilon) {
    if (++guard > 64 * s * s + 64) throw Error("exact_emd: flow augmentation did not terminate");
    std::fill(done_s.begin(), done_s.end(), false);
    std::fill(done_d.begin(), done_d.end(), false);
    std::fill(dist_d.begin(), dist_d.end(), inf);
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::fill(pred_s.begin(), pred_s.end(), none);
    for (std::size_t i = 0; i < s; ++i) dist_s[i] = supply[i] > kFlowEpsilon ? 0.0 : inf;

    // Dense Dijkstra over 2s nodes.
    std::size_t target = none;
    while (true) {
      double best = inf;
      std::size_t node = none;
      bool is_supply = false;
      for (std::size_t i = 0; i < s; ++i)
        if (!done_s[i] && dist_s[i] < best) best = dist_s[i], node = i, is_supply = true;
      for (std::size_t j = 0; j < s; ++j)
        if (!done_d[j] && dist_d[j] < best) best = dist_d[j], node = j, is_supply = false;
      if (node == none) break;
      if (is_supply) {
        done_s[node] = true;
        for (std::size_t j = 0; j < s; ++j) {
          if (done_d[j]) continue;
          const double reduced = std::max(0.0, cost(node, j) + u[node] - v[j]);
          if (best + reduced < dist_d[j]) {
            dist_d[j] = best + reduced;
            pred_d[j] = node;
          }
        }
      } else {
        done_d[node] = true;
        if (demand[node] > kFlowEpsilon) {
          target = node;
          break;
        }
        for (std::size_t i = 0; i < s; ++i) {
          if (done_s[i] || at(i, node) <= kFlowEpsilon) continue;
          const double reduced = std::max(0.0, v[node] - u[i] - cost(i, node));
          if (best + reduced < dist_s[i]) {
            dist_s[i] = best + reduced;
            pred_s[i] = node;
          }
        }
      }
    }
    if (target == none) throw Error("exact_emd: no augmenting path (masses inconsistent)");

    const double reach = dist_d[target];
    // Distances past the target are capped so unsettled nodes keep valid potentials.
    for (std::size_t i = 0; i < s; ++i) u[i] += std::min(dist_s[i], reach);
    for (std::size_t j = 0; j < s; ++j) v[j] += std::min(dist_d[j], reach);

    double push = demand[target];
    std::size_t j = target;
    while (true) {
      const std::size_t i = pred_d[j];
      if (pred_s[i] == none) {
        push = std::min(push, supply[i]);
        break;
      }
      push = std::min(push, at(i, pred_s[i]));
      j = pred_s[i];
    }
    j = target;
    while (true) {
      const std::size_t i = pred_d[j];
      at(i, j) += push;
      if (pred_s[i] == none) {
        supply[i] -= push;
        break;
      }
      at(i, pred_s[i]) -= push;
      j = pred_s[i];
    }
    demand[target] -= push;
  }

  double total = 0.0;
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j)
      if (at(i, j) > 0.0) total += at(i, j) * cost(i, j);
  return total;
}

double emd_1d(std::span<const double> positions, std::span<const double> p, std::span<const double> q) {
  if (positions.size() != p.size() || p.size() != q.size()) throw Error("emd_1d: size mismatch");
  if (positions.empty()) throw Error("emd_1d: empty support");
  for (std::size_t i = 1; i < positions.size(); ++i)
    if (!(positions[i] > positions[i - 1])) throw Error("emd_1d: positions must be strictly increasing");
  double cum_p = 0.0, cum_q = 0.0, total = 0.0;
  for (std::size_t i = 0; i + 1 < positions.size(); ++i) {
    cum_p += p[i];
    cum_q += q[i];
    total += std::abs(cum_p - cum_q) * (positions[i + 1] - positions[i]);
  }
  return total;
}

}  // namespace bigeo
