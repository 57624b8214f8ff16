#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coopsym/coupling.hpp"
#include "coopsym/field.hpp"
#include "coopsym/solver.hpp"
#include "coopsym/spectral.hpp"

namespace coopsym {

enum class Classification { Radial, FoliatedSchwarzStrict, FoliatedSchwarz, Violated, OutsideHypotheses };

std::string to_string(Classification c);

struct SymmetryTolerances {
  double rad_tol = 1e-6;
  double mono_tol = 1e-6;
  double axis_tol = 1e-8;
};

struct AxisEstimate {
  double angle = 0.0;
  int component = 0;
  /// |sum_n w_n u_c(n) e^{i theta_n}| / (||U||_inf sum_n w_n) per component.
  std::vector<double> magnitudes;
  std::vector<double> component_angles;
  /// Some component's first mode has a part off the axis (or against it)
  /// larger than axis_tol.
  bool disagreement = false;
};

/// Throws DegenerateAxis when every component's first-mode magnitude is below axis_tol.
AxisEstimate estimate_axis(const VectorField& u, double axis_tol = 1e-8);

struct HypothesisLedger {
  bool full_coupling = false;
  bool convex_derivatives = false;
  bool morse_at_most_one = false;
  bool all() const { return full_coupling && convex_derivatives && morse_at_most_one; }
};

struct SymmetryReport {
  std::optional<double> axis_angle;
  std::optional<AxisEstimate> axis;
  double radiality_deficit = 0.0;
  /// Largest increase rate (per radian, relative to ||U||_inf) moving away from the axis.
  double monotonicity_violation = 0.0;
  /// Fraction of (ring, angle step) pairs away from the poles with slope <= -mono_tol.
  double strict_fraction = 0.0;
  /// The axis sat on a grid or mid-grid angle, so grid values were used directly.
  bool axis_on_grid = false;
  Classification classification = Classification::Radial;
  HypothesisLedger hypotheses;
  bool alarm = false;
  SymmetryTolerances tolerances;
};

/// max over rings and components of (max_theta - min_theta) / ||U||_inf.
double radiality_deficit(const VectorField& u);

SymmetryReport classify(const Solution& solution, const MorseResult& morse, const CouplingReport& coupling,
                        const SymmetryTolerances& tol = {});

/// Shape-only classification (hypothesis ledger all false).
SymmetryReport classify_shape(const VectorField& u, const SymmetryTolerances& tol = {});

}  // namespace coopsym
