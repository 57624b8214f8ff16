#pragma once

// Oracles and helpers shared by the unit tests.  Everything here is computed
// independently of the library code it checks.

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/bessel.hpp>

#include "coopsym/field.hpp"
#include "coopsym/grid.hpp"

namespace testing {

inline coopsym::GridPtr make_grid(const coopsym::Domain& d, int nr, int ntheta) {
  return std::make_shared<const coopsym::Grid>(coopsym::build_grid(d, nr, ntheta));
}

inline coopsym::GridPtr unit_disk(int nr, int ntheta) { return make_grid(coopsym::Domain::disk(1.0), nr, ntheta); }

/// Squared Bessel zero j_{n,1}^2: the first Dirichlet eigenvalue of the unit
/// disk (n = 0) and of the unit half-disk (n = 1).
inline double bessel_zero_sq(int n) {
  const double j = boost::math::cyl_bessel_j_zero(static_cast<double>(n), 1);
  return j * j;
}

/// Dense copy of a sparse node operator, built column by column through
/// matrix-vector products.
inline Eigen::MatrixXd dense(const coopsym::SparseOperator& op) {
  const int n = op.dimension();
  Eigen::MatrixXd a(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = 1.0;
    a.col(j) = op.matrix * e;
  }
  return a;
}

/// Dense strong-form matrix of -Delta_h + D on a region (component-major
/// unknowns, region nodes in increasing order).
inline Eigen::MatrixXd dense_operator(const coopsym::Grid& grid, const coopsym::MatrixField& d,
                                      const coopsym::Region& region) {
  const Eigen::MatrixXd lap = dense(coopsym::laplacian(grid));
  const std::vector<int> nodes = region.nodes();
  const int s = static_cast<int>(nodes.size());
  const int m = d.m;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(s * m, s * m);
  for (int c = 0; c < m; ++c)
    for (int p = 0; p < s; ++p)
      for (int q = 0; q < s; ++q) a(c * s + p, c * s + q) = lap(nodes[p], nodes[q]);
  for (int p = 0; p < s; ++p)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) a(i * s + p, j * s + p) += d(nodes[p], i, j);
  return a;
}

/// Definition-level full coupling: every nonempty proper subset I of the
/// components receives an edge from its complement.
inline bool fully_coupled_by_bipartition(const std::vector<std::vector<char>>& adjacency) {
  const int m = static_cast<int>(adjacency.size());
  for (unsigned mask = 1; mask + 1 < (1u << m); ++mask) {
    bool linked = false;
    for (int i = 0; i < m && !linked; ++i) {
      if (!(mask >> i & 1u)) continue;
      for (int j = 0; j < m && !linked; ++j)
        if (!(mask >> j & 1u) && adjacency[i][j]) linked = true;
    }
    if (!linked) return false;
  }
  return true;
}

/// u(0) of the positive radial solution of -u'' - u'/r = |u|^{p-1} u on the
/// unit disk, by classical RK4 on a uniform mesh and bisection on the first
/// zero.
inline double lane_emden_center_value(double p, int steps = 20000) {
  auto shoot = [&](double a) {
    // Series start u = a - a^p r^2 / 4 at r0.
    const double r0 = 1e-4;
    double r = r0, u = a - std::pow(a, p) * r0 * r0 / 4.0, v = -std::pow(a, p) * r0 / 2.0;
    const double h = (1.0 - r0) / steps;
    auto f = [&](double rr, double uu, double vv, double& du, double& dv) {
      du = vv;
      dv = -vv / rr - std::copysign(std::pow(std::abs(uu), p), uu);
    };
    for (int k = 0; k < steps; ++k) {
      double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
      f(r, u, v, k1u, k1v);
      f(r + h / 2, u + h / 2 * k1u, v + h / 2 * k1v, k2u, k2v);
      f(r + h / 2, u + h / 2 * k2u, v + h / 2 * k2v, k3u, k3v);
      f(r + h, u + h * k3u, v + h * k3v, k4u, k4v);
      u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
      v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
      r += h;
      if (u < 0) return -1.0;  // first zero before r = 1
    }
    return u;
  };
  // For this equation u(1; a) > 0 for small a and the first zero moves inward as a grows.
  double lo = 0.5, hi = 10.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (shoot(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline coopsym::VectorField random_field(const coopsym::GridPtr& grid, int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  coopsym::VectorField f(grid, m);
  for (double& v : f.values()) v = uni(rng);
  return f;
}

/// g(r) * shape(theta) in every component, scaled per component.
template <class Radial, class Angular>
coopsym::VectorField synthetic(const coopsym::GridPtr& grid, std::vector<double> scale, Radial g, Angular shape) {
  coopsym::VectorField f(grid, static_cast<int>(scale.size()));
  for (int c = 0; c < f.components(); ++c)
    for (int n = 0; n < grid->node_count(); ++n)
      f.at(c, n) = scale[c] * g(grid->radius(n)) * shape(grid->theta_nodes[grid->angle_of(n)]);
  return f;
}

}  // namespace testing
