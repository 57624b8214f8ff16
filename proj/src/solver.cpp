#include "coopsym/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/SparseLU>
#include <boost/numeric/odeint.hpp>

#include "coopsym/error.hpp"
#include "coopsym/kernels.hpp"

namespace coopsym {

namespace {

double row_sum_norm(const SparseMatrix& a) {
  double best = 0.0;
  for (int row = 0; row < a.outerSize(); ++row) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(a, row); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

double weighted_norm(const VectorField& f) {
  return f.weighted_norm();
}

Residual residual_with(const Problem& problem, const VectorField& u, const SparseOperator& lap, double lap_norm) {
  Residual res;
  res.field = kernels::parallel::apply(lap, u);
  const VectorField f = kernels::parallel::nonlinearity(problem, u);
  res.field -= f;
  res.inf = res.field.max_abs();
  res.floor = 16.0 * std::numeric_limits<double>::epsilon() * (lap_norm * u.max_abs() + f.max_abs());
  return res;
}

// K (per component) - W J_F assembled in the unknown order c * N + node.
Eigen::SparseMatrix<double> newton_matrix(const SparseOperator& stiff, const Grid& grid, const MatrixField& jac) {
  const int n = grid.node_count();
  const int m = jac.m;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<size_t>(stiff.matrix.nonZeros()) * m + static_cast<size_t>(n) * m * m);
  for (int c = 0; c < m; ++c)
    for (int row = 0; row < n; ++row)
      for (SparseMatrix::InnerIterator it(stiff.matrix, row); it; ++it)
        t.emplace_back(c * n + row, c * n + static_cast<int>(it.col()), it.value());
  for (int node = 0; node < n; ++node) {
    const double w = grid.cell_weights[node];
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) t.emplace_back(i * n + node, j * n + node, -w * jac(node, i, j));
  }
  Eigen::SparseMatrix<double> a(n * m, n * m);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

}  // namespace

Residual residual(const Problem& problem, const VectorField& u) {
  const SparseOperator lap = laplacian(u.grid());
  return residual_with(problem, u, lap, row_sum_norm(lap.matrix));
}

Solution newton_solve(const Problem& problem, const VectorField& initial, const NewtonOptions& opts,
                      std::string guess_label) {
  if (initial.components() != problem.components())
    throw InvalidArgument("initial guess component count does not match the problem");
  if (!initial.all_finite()) throw InvalidArgument("initial guess has non-finite values");

  const Grid& grid = initial.grid();
  const SparseOperator lap = laplacian(grid);
  const SparseOperator stiff = stiffness(grid);
  const double lap_norm = row_sum_norm(lap.matrix);
  const int n = grid.node_count();

  VectorField u = initial;
  Residual res = residual_with(problem, u, lap, lap_norm);
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;

  for (int iter = 0;; ++iter) {
    if (res.inf <= std::max(opts.tol, res.floor)) {
      Solution sol{u, problem, res.inf, res.floor, iter, std::move(guess_label), false};
      sol.trivial = u.max_abs() < opts.zero_threshold;
      return sol;
    }
    if (iter >= opts.max_iters)
      throw SolverError(SolverError::Kind::MaxItersExceeded,
                        "Newton did not converge in " + std::to_string(opts.max_iters) +
                            " iterations (residual " + std::to_string(res.inf) + ")");

    const MatrixField jac = kernels::parallel::jacobian(problem, u);
    const Eigen::SparseMatrix<double> a = newton_matrix(stiff, grid, jac);
    if (!analyzed) {
      lu.analyzePattern(a);
      analyzed = true;
    }
    lu.factorize(a);
    if (lu.info() != Eigen::Success)
      throw SolverError(SolverError::Kind::SingularJacobian, "Newton matrix factorization failed: " + lu.lastErrorMessage());

    Eigen::VectorXd rhs(n * problem.components());
    for (int c = 0; c < problem.components(); ++c)
      for (int node = 0; node < n; ++node) rhs[c * n + node] = -grid.cell_weights[node] * res.field.at(c, node);
    const Eigen::VectorXd delta = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !delta.allFinite())
      throw SolverError(SolverError::Kind::SingularJacobian, "Newton step solve failed");

    // Armijo backtracking on the weighted residual norm.
    const double merit = weighted_norm(res.field);
    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k <= opts.max_backtracks; ++k, step *= opts.backtrack) {
      VectorField trial = u;
      auto& v = trial.values();
      for (size_t idx = 0; idx < v.size(); ++idx) v[idx] += step * delta[static_cast<Eigen::Index>(idx)];
      if (!trial.all_finite()) continue;
      Residual trial_res = residual_with(problem, trial, lap, lap_norm);
      if (weighted_norm(trial_res.field) <= (1.0 - opts.armijo * step) * merit) {
        u = std::move(trial);
        res = std::move(trial_res);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Stagnation at the rounding level counts as convergence.
      if (res.inf <= 100.0 * std::max(opts.tol, res.floor)) {
        Solution sol{u, problem, res.inf, res.floor, iter + 1, std::move(guess_label), false};
        sol.trivial = u.max_abs() < opts.zero_threshold;
        return sol;
      }
      throw SolverError(SolverError::Kind::LineSearchFailed,
                        "Armijo backtracking failed (residual " + std::to_string(res.inf) + ")");
    }
  }
}

// ---------------------------------------------------------------------------
// Radial shooting oracle

std::string to_string(SignPattern pattern) {
  return pattern == SignPattern::Positive ? "positive" : "one-node";
}

double RadialProfile::value_at(int component, double r) const {
  const auto& u = values[component];
  const auto& du = derivatives[component];
  // The first disk sample sits at 1e-6 R, where u is flat to O(r^2).
  if (r <= radii.front()) return u.front();
  if (r >= radii.back()) return u.back();
  const auto it = std::upper_bound(radii.begin(), radii.end(), r);
  const size_t k = static_cast<size_t>(it - radii.begin()) - 1;
  const double h = radii[k + 1] - radii[k];
  const double s = (r - radii[k]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * u[k] + h10 * h * du[k] + h01 * u[k + 1] + h11 * h * du[k + 1];
}

double RadialProfile::boundary_miss() const {
  double miss = 0.0;
  for (const auto& u : values) {
    if (!std::isfinite(u.back())) return std::numeric_limits<double>::infinity();
    miss = std::max(miss, std::abs(u.back()));
  }
  return miss;
}

namespace {

using State = std::vector<double>;

struct RadialSystem {
  const Problem* problem;
  int m;

  void operator()(const State& y, State& dy, double r) const {
    double u[16], f[16];
    for (int c = 0; c < m; ++c) u[c] = y[c];
    problem->impl().F(r, std::span<const double>(u, m), std::span<double>(f, m));
    for (int c = 0; c < m; ++c) {
      dy[c] = y[m + c];
      dy[m + c] = -y[m + c] / r - f[c];
    }
  }
};

struct Trajectory {
  RadialProfile profile;
  bool blew_up = false;
  /// Sign changes including the final sample, so the count flips exactly when u(r_outer) crosses 0.
  int crossings = 0;
};

// Integrates from the free value and samples `samples + 1` points.
Trajectory integrate(const Problem& problem, const Domain& domain, const Eigen::VectorXd& free_value, int samples,
                     double ode_tol) {
  namespace ode = boost::numeric::odeint;
  const int m = problem.components();
  const double r_end = domain.r_outer;
  State y(2 * m, 0.0);
  double r_start;
  if (domain.kind == DomainKind::Disk) {
    r_start = 1e-6 * domain.r_outer;
    double u0[16], f0[16];
    for (int c = 0; c < m; ++c) u0[c] = free_value[c];
    problem.impl().F(r_start, std::span<const double>(u0, m), std::span<double>(f0, m));
    for (int c = 0; c < m; ++c) {
      y[c] = free_value[c] - 0.25 * f0[c] * r_start * r_start;
      y[m + c] = -0.5 * f0[c] * r_start;
    }
  } else {
    r_start = domain.r_inner;
    for (int c = 0; c < m; ++c) y[m + c] = free_value[c];
  }

  std::vector<double> times(samples + 1);
  for (int k = 0; k <= samples; ++k) times[k] = r_start + (r_end - r_start) * k / samples;
  times.back() = r_end;

  Trajectory traj;
  auto& prof = traj.profile;
  prof.free_value = free_value;
  prof.values.assign(m, {});
  prof.derivatives.assign(m, {});
  auto observer = [&](const State& s, double r) {
    prof.radii.push_back(r);
    for (int c = 0; c < m; ++c) {
      prof.values[c].push_back(s[c]);
      prof.derivatives[c].push_back(s[m + c]);
    }
  };

  RadialSystem sys{&problem, m};
  auto stepper = ode::make_dense_output(ode_tol, ode_tol, ode::runge_kutta_dopri5<State>());
  try {
    ode::integrate_times(stepper, sys, y, times.begin(), times.end(), (r_end - r_start) / samples, observer);
  } catch (const std::exception&) {
    traj.blew_up = true;
  }
  for (const auto& u : prof.values)
    for (double v : u)
      if (!std::isfinite(v) || std::abs(v) > 1e12) traj.blew_up = true;

  // Sign changes strictly inside (r_start, r_outer), and through r_outer.
  int worst = 0, worst_all = 0;
  for (int c = 0; c < m; ++c) {
    int count = 0;
    const auto& u = prof.values[c];
    double last = 0.0;
    for (size_t k = 1; k < u.size(); ++k) {
      if (u[k] == 0.0) continue;
      if (last != 0.0 && (u[k] > 0) != (last > 0)) {
        ++count;
        if (k + 1 == u.size()) worst_all = std::max(worst_all, count--);
      }
      last = u[k];
    }
    worst = std::max(worst, count);
    worst_all = std::max(worst_all, count);
  }
  prof.sign_changes = worst;
  traj.crossings = worst_all;
  return traj;
}

double mean_boundary_value(const RadialProfile& p) {
  double s = 0.0;
  for (const auto& u : p.values) s += u.back();
  return s / static_cast<double>(p.values.size());
}

}  // namespace

RadialProfile radial_shoot(const Problem& problem, const Domain& domain, SignPattern pattern, const ShootOptions& opts) {
  domain.validate();
  const int m = problem.components();
  const int target = pattern == SignPattern::Positive ? 0 : 1;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  const int scan_samples = 400;

  auto too_many = [&](const Trajectory& t) { return t.blew_up || t.crossings > target; };

  // Geometric scan along the diagonal ray for the first change of the zero count.
  double lo = 0.0, hi = 0.0;
  bool bracketed = false;
  Trajectory prev = integrate(problem, domain, opts.scan_min * ones, scan_samples, 1e-10);
  std::vector<std::pair<double, double>> misses;
  misses.emplace_back(opts.scan_min, mean_boundary_value(prev.profile));
  for (double t = opts.scan_min * opts.scan_growth; t <= opts.scan_max; t *= opts.scan_growth) {
    Trajectory cur = integrate(problem, domain, t * ones, scan_samples, 1e-10);
    misses.emplace_back(t, mean_boundary_value(cur.profile));
    const bool below = prev.crossings == target && !too_many(prev);
    if (below && too_many(cur)) {
      lo = t / opts.scan_growth;
      hi = t;
      bracketed = true;
      break;
    }
    prev = std::move(cur);
  }

  if (!bracketed) {
    // A linear problem off resonance has only the zero solution.
    const auto [t1, g1] = misses[misses.size() / 4];
    const auto [t2, g2] = misses[misses.size() / 2];
    const bool linear = std::abs(g2 * t1 - g1 * t2) <= 1e-8 * (std::abs(g2 * t1) + 1e-300);
    Eigen::VectorXd f0 = problem.eval_F(domain.r_outer, Eigen::VectorXd::Zero(m));
    if (linear && f0.cwiseAbs().maxCoeff() == 0.0) {
      Trajectory zero = integrate(problem, domain, Eigen::VectorXd::Zero(m), opts.samples, opts.ode_tol);
      return zero.profile;
    }
    throw BracketNotFound("no " + to_string(pattern) + " transition found in the shooting scan");
  }

  // Bisection on the zero-count predicate: the limit has its last zero at r_outer.
  Trajectory best = integrate(problem, domain, lo * ones, opts.samples, opts.ode_tol);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    Trajectory t = integrate(problem, domain, mid * ones, opts.samples, opts.ode_tol);
    if (too_many(t))
      hi = mid;
    else
      lo = mid;
    best = std::move(t);
    if (std::abs(mean_boundary_value(best.profile)) < opts.boundary_tol || hi - lo <= 1e-15 * hi) break;
  }

  // Off the swap-symmetric diagonal the components miss separately: finish
  // with Newton on the m-dimensional boundary map.
  if (best.profile.boundary_miss() >= opts.boundary_tol && m > 1) {
    Eigen::VectorXd a = best.profile.free_value;
    for (int it = 0; it < 50 && best.profile.boundary_miss() >= opts.boundary_tol; ++it) {
      Eigen::VectorXd g(m);
      for (int c = 0; c < m; ++c) g[c] = best.profile.values[c].back();
      Eigen::MatrixXd jac(m, m);
      for (int k = 0; k < m; ++k) {
        Eigen::VectorXd ak = a;
        const double h = 1e-7 * std::max(1.0, std::abs(a[k]));
        ak[k] += h;
        Trajectory tk = integrate(problem, domain, ak, opts.samples, opts.ode_tol);
        for (int c = 0; c < m; ++c) jac(c, k) = (tk.profile.values[c].back() - g[c]) / h;
      }
      const Eigen::VectorXd step = jac.fullPivLu().solve(g);
      if (!step.allFinite()) break;
      // Damped: halve until the trajectory survives and the miss drops.
      bool improved = false;
      for (double lam = 1.0; lam > 1e-6; lam *= 0.5) {
        Trajectory trial = integrate(problem, domain, a - lam * step, opts.samples, opts.ode_tol);
        if (!trial.blew_up && trial.profile.boundary_miss() < best.profile.boundary_miss()) {
          a -= lam * step;
          best = std::move(trial);
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
  }
  if (best.profile.boundary_miss() >= std::max(opts.boundary_tol, 1e-8))
    throw BracketNotFound("shooting did not reach the boundary condition (miss " +
                          std::to_string(best.profile.boundary_miss()) + ")");
  return best.profile;
}

// ---------------------------------------------------------------------------
// Initial guesses

std::string to_string(GuessKind kind) {
  switch (kind) {
    case GuessKind::RadialBump: return "radial_bump";
    case GuessKind::NodalAngular: return "nodal_angular";
    case GuessKind::FromRadialProfile: return "from_radial_profile";
    case GuessKind::RandomSeeded: return "random_seeded";
  }
  return "unknown";
}

GuessKind guess_kind_from_string(const std::string& name) {
  if (name == "radial_bump") return GuessKind::RadialBump;
  if (name == "nodal_angular") return GuessKind::NodalAngular;
  if (name == "from_radial_profile") return GuessKind::FromRadialProfile;
  if (name == "random_seeded") return GuessKind::RandomSeeded;
  throw InvalidArgument("unknown guess kind '" + name + "'");
}

namespace {

// Smooth radial envelope vanishing at the Dirichlet boundaries.
double envelope(const Domain& d, double r, bool vanish_at_origin) {
  const double pi = std::numbers::pi;
  if (d.kind == DomainKind::Annulus) return std::sin(pi * (r - d.r_inner) / (d.r_outer - d.r_inner));
  return vanish_at_origin ? std::sin(pi * r / d.r_outer) : std::cos(0.5 * pi * r / d.r_outer);
}

}  // namespace

VectorField initial_guess(const GridPtr& grid, int components, const GuessSpec& spec) {
  VectorField u(grid, components);
  const Grid& g = *grid;
  std::vector<double> scale = spec.component_scale;
  if (scale.empty()) scale.assign(components, 1.0);
  if (static_cast<int>(scale.size()) != components) throw InvalidArgument("component_scale size mismatch");

  switch (spec.kind) {
    case GuessKind::RadialBump:
      for (int c = 0; c < components; ++c)
        for (int n = 0; n < g.node_count(); ++n)
          u.at(c, n) = spec.amplitude * scale[c] * envelope(g.domain, g.radius(n), false);
      break;
    case GuessKind::NodalAngular:
      for (int c = 0; c < components; ++c)
        for (int n = 0; n < g.node_count(); ++n)
          u.at(c, n) = spec.amplitude * scale[c] * envelope(g.domain, g.radius(n), true) *
                       std::cos(g.theta_nodes[g.angle_of(n)] - spec.angle);
      break;
    case GuessKind::FromRadialProfile: {
      if (!spec.profile) throw InvalidArgument("from_radial_profile guess needs a profile");
      const RadialProfile& p = *spec.profile;
      for (int c = 0; c < components; ++c) {
        const int src = std::min(c, p.components() - 1);
        for (int n = 0; n < g.node_count(); ++n) u.at(c, n) = spec.amplitude * scale[c] * p.value_at(src, g.radius(n));
      }
      break;
    }
    case GuessKind::RandomSeeded: {
      std::mt19937_64 rng(spec.seed);
      std::uniform_real_distribution<double> coef(-1.0, 1.0);
      std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
      for (int c = 0; c < components; ++c)
        for (int mode = 0; mode < 4; ++mode) {
          const double a = coef(rng), ph = phase(rng);
          for (int n = 0; n < g.node_count(); ++n)
            u.at(c, n) += spec.amplitude * scale[c] * a * envelope(g.domain, g.radius(n), mode > 0) *
                          std::cos(mode * g.theta_nodes[g.angle_of(n)] + ph);
        }
      break;
    }
  }
  return u;
}

}  // namespace coopsym
