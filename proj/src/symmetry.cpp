#include "coopsym/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "coopsym/error.hpp"

namespace coopsym {

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Radial: return "radial";
    case Classification::FoliatedSchwarzStrict: return "foliated_schwarz_strict";
    case Classification::FoliatedSchwarz: return "foliated_schwarz";
    case Classification::Violated: return "violated";
    case Classification::OutsideHypotheses: return "outside_hypotheses";
  }
  return "unknown";
}

AxisEstimate estimate_axis(const VectorField& u, double axis_tol) {
  const Grid& g = u.grid();
  const int m = u.components();
  const double scale = u.max_abs();
  double total_w = 0.0;
  for (double w : g.cell_weights) total_w += w;

  AxisEstimate est;
  std::vector<std::complex<double>> modes(m);
  for (int c = 0; c < m; ++c) {
    std::complex<double> a = 0.0;
    for (int n = 0; n < g.node_count(); ++n)
      a += g.cell_weights[n] * u.at(c, n) * std::polar(1.0, g.theta_nodes[g.angle_of(n)]);
    modes[c] = a;
    est.magnitudes.push_back(scale > 0 ? std::abs(a) / (scale * total_w) : 0.0);
    double ang = std::arg(a);
    if (ang < 0) ang += 2.0 * std::numbers::pi;
    // Angles a hair below 2 pi are rounding noise around the zero axis.
    if (2.0 * std::numbers::pi - ang < 1e-8) ang = 0.0;
    est.component_angles.push_back(ang);
  }
  int best = -1;
  for (int c = 0; c < m; ++c)
    if (est.magnitudes[c] >= axis_tol && (best < 0 || est.magnitudes[c] > est.magnitudes[best])) best = c;
  if (best < 0) throw DegenerateAxis("no component has a first angular mode above axis_tol");
  est.component = best;
  est.angle = est.component_angles[best];

  const std::complex<double> p = std::polar(1.0, est.angle);
  for (int c = 0; c < m; ++c) {
    const std::complex<double> a = modes[c] / (scale * total_w);
    const double along = a.real() * p.real() + a.imag() * p.imag();
    const double across = std::abs(a.imag() * p.real() - a.real() * p.imag());
    if (across > axis_tol || along < -axis_tol) est.disagreement = true;
  }
  return est;
}

double radiality_deficit(const VectorField& u) {
  const Grid& g = u.grid();
  const double scale = u.max_abs();
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (int c = 0; c < u.components(); ++c)
    for (int i = 0; i < g.nr; ++i) {
      double lo = u.at(c, g.node(i, 0)), hi = lo;
      for (int j = 1; j < g.ntheta; ++j) {
        lo = std::min(lo, u.at(c, g.node(i, j)));
        hi = std::max(hi, u.at(c, g.node(i, j)));
      }
      worst = std::max(worst, (hi - lo) / scale);
    }
  return worst;
}

namespace {

// Periodic cubic Hermite interpolation with centered-difference slopes.
double ring_value(const VectorField& u, int c, int ring, double angle) {
  const Grid& g = u.grid();
  const double t = angle / g.dtheta;
  const double fl = std::floor(t);
  const double s = t - fl;
  const int j = g.wrap(static_cast<int>(fl));
  auto f = [&](int k) { return u.at(c, g.node(ring, g.wrap(j + k))); };
  const double p0 = f(0), p1 = f(1);
  const double m0 = 0.5 * (f(1) - f(-1));
  const double m1 = 0.5 * (f(2) - f(0));
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
}

struct Monotonicity {
  double violation = 0.0;
  double strict_fraction = 0.0;
  bool on_grid = false;
};

// Profiles f(p + s) and f(p - s), s in [0, pi], for every ring and component.
Monotonicity monotonicity(const VectorField& u, double axis, double mono_tol) {
  const Grid& g = u.grid();
  const double scale = u.max_abs();
  const int half = g.ntheta / 2;
  const double halfstep = 0.5 * g.dtheta;
  const double k2 = std::round(axis / halfstep);
  Monotonicity out;
  out.on_grid = std::abs(axis - k2 * halfstep) <= 1e-6 * g.dtheta;

  // Sample offsets s_k and the values on both sides.
  std::vector<double> offsets;
  if (out.on_grid && static_cast<long>(k2) % 2 != 0) {
    for (int k = 0; k < half; ++k) offsets.push_back((k + 0.5) * g.dtheta);
  } else {
    for (int k = 0; k <= half; ++k) offsets.push_back(k * g.dtheta);
  }
  const int center = static_cast<int>(std::floor(k2 / 2.0));

  int strict = 0, counted = 0;
  std::vector<double> plus(offsets.size()), minus(offsets.size());
  for (int c = 0; c < u.components(); ++c)
    for (int i = 0; i < g.nr; ++i) {
      for (size_t k = 0; k < offsets.size(); ++k) {
        if (out.on_grid) {
          const bool odd = static_cast<long>(k2) % 2 != 0;
          const int jp = odd ? center + 1 + static_cast<int>(k) : center + static_cast<int>(k);
          const int jm = center - static_cast<int>(k);
          plus[k] = u.at(c, g.node(i, g.wrap(jp)));
          minus[k] = u.at(c, g.node(i, g.wrap(jm)));
        } else {
          double ap = std::fmod(axis + offsets[k], 2 * std::numbers::pi);
          double am = std::fmod(axis - offsets[k] + 4 * std::numbers::pi, 2 * std::numbers::pi);
          plus[k] = ring_value(u, c, i, ap);
          minus[k] = ring_value(u, c, i, am);
        }
      }
      for (size_t k = 0; k + 1 < offsets.size(); ++k) {
        const double ds = offsets[k + 1] - offsets[k];
        const double sp = (plus[k + 1] - plus[k]) / (ds * scale);
        const double sm = (minus[k + 1] - minus[k]) / (ds * scale);
        out.violation = std::max({out.violation, sp, sm});
        // Strictness ignores bands of width dtheta at both poles.
        if (offsets[k] < g.dtheta - 1e-12 || offsets[k + 1] > std::numbers::pi - g.dtheta + 1e-12) continue;
        counted += 2;
        strict += (sp <= -mono_tol) + (sm <= -mono_tol);
      }
    }
  out.strict_fraction = counted > 0 ? static_cast<double>(strict) / counted : 0.0;
  return out;
}

SymmetryReport shape(const VectorField& u, const SymmetryTolerances& tol, const HypothesisLedger& hyp) {
  SymmetryReport rep;
  rep.tolerances = tol;
  rep.hypotheses = hyp;
  rep.radiality_deficit = radiality_deficit(u);
  if (rep.radiality_deficit <= tol.rad_tol) {
    try {
      rep.axis = estimate_axis(u, tol.axis_tol);
      rep.axis_angle = rep.axis->angle;
    } catch (const DegenerateAxis&) {
    }
    rep.classification = Classification::Radial;
    return rep;
  }

  bool shape_ok = false;
  try {
    rep.axis = estimate_axis(u, tol.axis_tol);
    rep.axis_angle = rep.axis->angle;
    const Monotonicity mono = monotonicity(u, rep.axis->angle, tol.mono_tol);
    rep.monotonicity_violation = mono.violation;
    rep.strict_fraction = mono.strict_fraction;
    rep.axis_on_grid = mono.on_grid;
    shape_ok = !rep.axis->disagreement && mono.violation <= tol.mono_tol;
  } catch (const DegenerateAxis&) {
    // Nonradial without a first angular mode cannot be monotone in theta.
    shape_ok = false;
  }

  if (shape_ok) {
    rep.classification =
        rep.strict_fraction >= 0.5 ? Classification::FoliatedSchwarzStrict : Classification::FoliatedSchwarz;
  } else {
    rep.classification = hyp.all() ? Classification::Violated : Classification::OutsideHypotheses;
  }
  rep.alarm = rep.classification == Classification::Violated;
  return rep;
}

}  // namespace

SymmetryReport classify(const Solution& solution, const MorseResult& morse, const CouplingReport& coupling,
                        const SymmetryTolerances& tol) {
  HypothesisLedger hyp;
  hyp.full_coupling = coupling.fully_coupled;
  hyp.convex_derivatives = solution.problem.has_tag(Tag::ConvexDerivatives);
  hyp.morse_at_most_one = !morse.inconclusive && morse.index <= 1;
  return shape(solution.field, tol, hyp);
}

SymmetryReport classify_shape(const VectorField& u, const SymmetryTolerances& tol) {
  return shape(u, tol, HypothesisLedger{});
}

}  // namespace coopsym
