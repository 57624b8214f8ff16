#pragma once

// Reflection differences W^e = U - U o sigma_e and the linear system they
// solve on the cap Omega(e) = {x . e > 0}:
//
//   -Delta W + B^e(x) W = 0,   B^e = -int_0^1 J_F(|x|, t U + (1 - t) U^sigma) dt.

#include <optional>
#include <string>
#include <vector>

#include "coopsym/field.hpp"
#include "coopsym/grid.hpp"
#include "coopsym/solver.hpp"
#include "coopsym/spectral.hpp"

namespace coopsym {

struct ReflectionPack {
  Direction direction;
  Region cap;
  VectorField reflected;  // U^sigma
  VectorField w;          // W^e over the whole grid
  MatrixField b;          // B^e
  MatrixField b_sym;      // B^{e,s} = -(J(U) + J(U^sigma)) / 2
  double q_e = 0.0;       // Q^e(W^e; Omega(e))
  double q_es = 0.0;      // Q^{e,s}(W^e; Omega(e))
  double w_norm_sq = 0.0; // ||W^e||^2 over the cap
  int quad_nodes = 8;
};

ReflectionPack reflection_pack(const Solution& solution, Direction e, int quad_nodes = 8);

/// max |(-Delta_h W^e + B^e W^e)| over the cap nodes.
double difference_residual(const ReflectionPack& pack, const Solution& solution);

struct CoefficientCheck {
  /// min over cap nodes and (i, j) of b^e_ij - b^{e,s}_ij.
  double min_gap = 0.0;
  /// Cap nodes where every component of U and U^sigma differ by more than
  /// max(tol, differ_rel ||U||_inf).  Closer values leave a gap of order
  /// |U - U^sigma|^2 that rounding in B^e cannot resolve.
  int strict_nodes = 0;
  /// Of those, nodes where some off-diagonal gap is not > 0.
  int strict_failures = 0;
  /// Share of cap nodes left out of the strict check.
  double skipped_fraction = 0.0;
};

CoefficientCheck coefficient_check(const ReflectionPack& pack, double tol = 1e-10, double differ_rel = 1e-6);

/// Reflection identities over every grid direction.
struct ChainSummary {
  int directions = 0;
  double max_abs_q_e = 0.0;
  /// max over e of |Q^e| - (1e-6 ||W^e||^2 + 1e-8); <= 0 when the chain holds.
  double max_q_excess = 0.0;
  /// max over e of Q^{e,s} - Q^e.
  double max_qes_minus_qe = 0.0;
  double max_difference_residual = 0.0;
  double min_coefficient_gap = 0.0;
  int strict_failures = 0;
  double max_skipped_fraction = 0.0;
};

ChainSummary chain_summary(const Solution& solution, int quad_nodes = 8);

struct DirectionResult {
  Direction direction;
  double angle = 0.0;
  std::optional<double> lambda_sym_bs;        // lambda_1^s(-Delta + B^{e,s}, Omega(e))
  std::optional<double> lambda_sym_b;         // lambda_1^s(-Delta + B^e, Omega(e))
  std::optional<double> lambda_principal_b;   // lambda~_1(-Delta + B^e, Omega(e))
  /// Q^{e,s} of the odd extension over the domain and of the cap eigenfield.
  std::optional<double> odd_q_full;
  std::optional<double> odd_q_cap;
  double w_min = 0.0;
  double w_max = 0.0;
  std::string error;
};

struct DirectionScanOptions {
  int quad_nodes = 8;
  bool principal = true;
  /// Negative selects default_tol_eig(grid).
  double tol_eig = -1.0;
  EigenOptions eigen;
};

struct DirectionScan {
  std::vector<DirectionResult> rows;
  Direction best_direction;
  double best_value = 0.0;
  double tol_eig = 0.0;
  bool exists_nonnegative = false;
  std::string verdict;
};

DirectionScan direction_scan(const Solution& solution, const DirectionScanOptions& opts = {});

struct SignSummary {
  Direction direction;
  double angle = 0.0;  // rotation from the base direction, in [0, pi)
  std::vector<double> min;
  std::vector<double> max;
  double positive_mass = 0.0;
  double negative_mass = 0.0;
  bool strictly_positive = false;
  bool vanishing = false;
};

struct RotatingPlaneScan {
  Direction base;
  std::vector<SignSummary> rows;
  /// Every W^theta vanished to tolerance.
  bool identically_symmetric = false;
  std::optional<double> last_positive_theta;
  /// First scanned angle at which W^theta stops being strictly positive.
  std::optional<double> theta0_estimate;
  /// lambda~_1 of the linearization on Omega(e_theta0), when cooperative.
  std::optional<double> principal_at_theta0;
  double pos_tol_rel = 1e-8;
};

/// W^theta on Omega(e_theta) for e_theta = base + t dtheta, t = 0 .. ntheta/2 - 1.
RotatingPlaneScan rotating_plane_scan(const Solution& solution, Direction base, double pos_tol_rel = 1e-8);

}  // namespace coopsym
