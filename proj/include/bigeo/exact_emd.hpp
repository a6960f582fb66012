#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>
#include <json.hpp>

namespace bigeo {

/// Two probability vectors over a shared support with a metric ground cost.
struct TransportInstance {
  Eigen::MatrixXd cost;
  Eigen::VectorXd p;
  Eigen::VectorXd q;

  static constexpr std::size_t kMaxSupport = 512;

  /// cost(i, j) = |x_i - x_j|^alpha_ground over the rows of `points`.
  static TransportInstance from_points(const Eigen::MatrixXd& points, Eigen::VectorXd p, Eigen::VectorXd q,
                                       double alpha_ground = 1.0);
  /// Accepts {"cost": [[...]], "p": [...], "q": [...]} or
  /// {"points": [[...]], "alpha_ground": a, "p": [...], "q": [...]}.
  static TransportInstance from_json(const nlohmann::json& j);

  std::size_t support_size() const { return static_cast<std::size_t>(p.size()); }
  /// Throws Error unless cost is square, symmetric, nonnegative with zero
  /// diagonal and p, q are nonnegative with unit mass (1e-12).
  void validate() const;
};

/// Minimal transport cost between p and q, solved exactly as a min-cost flow
/// (successive shortest paths with Dijkstra and node potentials).
double exact_emd(const TransportInstance& instance);

/// Closed form on the line with cost |x - y|: sum over gaps of |CDF_p - CDF_q| * gap.
double emd_1d(std::span<const double> positions, std::span<const double> p, std::span<const double> q);

}  // namespace bigeo
