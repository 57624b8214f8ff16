#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coopsym/field.hpp"
#include "coopsym/grid.hpp"
#include "coopsym/problems.hpp"

namespace coopsym {

struct NewtonOptions {
  int max_iters = 50;
  /// Target for max |-Delta_h U - F(|x|, U)|.  The effective tolerance never
  /// goes below the rounding floor of applying -Delta_h (see Solution).
  double tol = 1e-10;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 30;
  /// ||U||_inf below this marks the trivial solution.
  double zero_threshold = 1e-10;
};

struct Solution {
  VectorField field;
  Problem problem;
  double residual_inf = 0.0;
  /// 16 eps (||A||_inf ||U||_inf + ||F||_inf): what evaluating the residual
  /// itself can resolve.  Near the disk center ||A||_inf grows like
  /// (nr ntheta)^2, so on fine grids this exceeds 1e-10.
  double residual_floor = 0.0;
  int newton_iters = 0;
  std::string guess_label;
  /// Newton reached U = 0 (reported, not an error).
  bool trivial = false;
};

struct Residual {
  VectorField field;
  double inf = 0.0;
  double floor = 0.0;
};

/// -Delta_h U - F(|x|, U) at every node, with its max norm and rounding floor.
Residual residual(const Problem& problem, const VectorField& u);

Solution newton_solve(const Problem& problem, const VectorField& initial, const NewtonOptions& opts = {},
                      std::string guess_label = "");

enum class SignPattern { Positive, OneNode };

std::string to_string(SignPattern pattern);

/// Shooting solution of u'' + u'/r + F(r, u) = 0 sampled densely on [r_start, r_outer].
struct RadialProfile {
  std::vector<double> radii;
  std::vector<std::vector<double>> values;       // [component][sample]
  std::vector<std::vector<double>> derivatives;  // [component][sample]
  /// u(0) for a disk, u'(r_inner) for an annulus.
  Eigen::VectorXd free_value;
  int sign_changes = 0;

  int components() const { return static_cast<int>(values.size()); }
  /// Cubic Hermite interpolation; for r below the first sample the even
  /// extension u(0) + O(r^2) is used.
  double value_at(int component, double r) const;
  double boundary_miss() const;
};

struct ShootOptions {
  double scan_min = 1e-3;
  double scan_max = 1e3;
  double scan_growth = 1.1;
  double boundary_tol = 1e-10;
  int samples = 4000;
  double ode_tol = 1e-12;
};

RadialProfile radial_shoot(const Problem& problem, const Domain& domain, SignPattern pattern,
                           const ShootOptions& opts = {});

enum class GuessKind { RadialBump, NodalAngular, FromRadialProfile, RandomSeeded };

std::string to_string(GuessKind kind);
GuessKind guess_kind_from_string(const std::string& name);

struct GuessSpec {
  GuessKind kind = GuessKind::RadialBump;
  double amplitude = 1.0;
  /// Per-component multipliers; empty means all ones.
  std::vector<double> component_scale;
  /// Axis angle of the nodal_angular profile g(r) cos(theta - angle).
  double angle = 0.0;
  std::uint64_t seed = 0;
  /// Required for FromRadialProfile.
  std::optional<RadialProfile> profile;
};

VectorField initial_guess(const GridPtr& grid, int components, const GuessSpec& spec);

}  // namespace coopsym
