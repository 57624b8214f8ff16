#include "coopsym/reflection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "coopsym/error.hpp"
#include "coopsym/kernels.hpp"

namespace coopsym {

ReflectionPack reflection_pack(const Solution& solution, Direction e, int quad_nodes) {
  if (quad_nodes < 2) throw InvalidArgument("quad_nodes must be at least 2");
  const VectorField& u = solution.field;
  const Grid& grid = u.grid();
  e.angle_index = grid.wrap(e.angle_index);

  ReflectionPack pack;
  pack.direction = e;
  pack.quad_nodes = quad_nodes;
  pack.cap = Region::cap(grid, e);
  pack.reflected = u.permuted(reflect_map(grid, e));
  pack.w = u - pack.reflected;
  pack.b = kernels::parallel::mean_value_coefficients(solution.problem, u, pack.reflected,
                                                      kernels::gauss_legendre(quad_nodes));
  pack.b_sym = kernels::parallel::endpoint_coefficients(solution.problem, u, pack.reflected);

  const VectorField wc = pack.w.restricted(pack.cap);
  pack.q_e = quadratic_form(LinearizedOperator::from_potential(u.grid_ptr(), pack.b), wc, pack.cap);
  pack.q_es = quadratic_form(LinearizedOperator::from_potential(u.grid_ptr(), pack.b_sym), wc, pack.cap);
  pack.w_norm_sq = wc.weighted_dot(wc);
  return pack;
}

double difference_residual(const ReflectionPack& pack, const Solution& solution) {
  const Grid& grid = solution.field.grid();
  const VectorField lw = kernels::parallel::apply(laplacian(grid), pack.w);
  const int m = pack.w.components();
  double worst = 0.0;
  for (int n = 0; n < grid.node_count(); ++n) {
    if (!pack.cap.contains(n)) continue;
    for (int i = 0; i < m; ++i) {
      double r = lw.at(i, n);
      for (int j = 0; j < m; ++j) r += pack.b(n, i, j) * pack.w.at(j, n);
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

CoefficientCheck coefficient_check(const ReflectionPack& pack, double tol, double differ_rel) {
  const int m = pack.b.m;
  // U^sigma is a permutation of U, so it has the same max norm.
  const double differ = std::max(tol, differ_rel * pack.reflected.max_abs());
  CoefficientCheck out;
  out.min_gap = std::numeric_limits<double>::infinity();
  int skipped = 0, cap_nodes = 0;
  for (int n = 0; n < pack.b.nodes; ++n) {
    if (!pack.cap.contains(n)) continue;
    ++cap_nodes;
    bool all_differ = true;
    for (int c = 0; c < m; ++c)
      if (std::abs(pack.w.at(c, n)) <= differ) all_differ = false;
    bool strict = true;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double gap = pack.b(n, i, j) - pack.b_sym(n, i, j);
        out.min_gap = std::min(out.min_gap, gap);
        if (i != j && !(gap > 0.0)) strict = false;
      }
    if (!all_differ) {
      ++skipped;
      continue;
    }
    ++out.strict_nodes;
    if (m > 1 && !strict) ++out.strict_failures;
  }
  if (cap_nodes == 0) out.min_gap = 0.0;
  out.skipped_fraction = cap_nodes > 0 ? static_cast<double>(skipped) / cap_nodes : 0.0;
  return out;
}

ChainSummary chain_summary(const Solution& solution, int quad_nodes) {
  const Grid& grid = solution.field.grid();
  const int nd = grid.ntheta;
  std::vector<ReflectionPack> packs(nd);
  std::vector<double> residuals(nd);
  std::vector<CoefficientCheck> checks(nd);
  for (int k = 0; k < nd; ++k) {
    packs[k] = reflection_pack(solution, Direction{k}, quad_nodes);
    residuals[k] = difference_residual(packs[k], solution);
    checks[k] = coefficient_check(packs[k]);
    packs[k].b = MatrixField();
    packs[k].b_sym = MatrixField();
  }
  ChainSummary out;
  out.directions = nd;
  out.max_q_excess = -std::numeric_limits<double>::infinity();
  out.max_qes_minus_qe = -std::numeric_limits<double>::infinity();
  out.min_coefficient_gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k < nd; ++k) {
    const ReflectionPack& p = packs[k];
    out.max_abs_q_e = std::max(out.max_abs_q_e, std::abs(p.q_e));
    out.max_q_excess = std::max(out.max_q_excess, std::abs(p.q_e) - (1e-6 * p.w_norm_sq + 1e-8));
    out.max_qes_minus_qe = std::max(out.max_qes_minus_qe, p.q_es - p.q_e);
    out.max_difference_residual = std::max(out.max_difference_residual, residuals[k]);
    out.min_coefficient_gap = std::min(out.min_coefficient_gap, checks[k].min_gap);
    out.strict_failures += checks[k].strict_failures;
    out.max_skipped_fraction = std::max(out.max_skipped_fraction, checks[k].skipped_fraction);
  }
  return out;
}

namespace {

void scan_direction(const Solution& solution, const DirectionScanOptions& opts, DirectionResult& row,
                    std::vector<VectorField>& warm) {
  const Grid& grid = solution.field.grid();
  const GridPtr& gp = solution.field.grid_ptr();
  const ReflectionPack pack = reflection_pack(solution, row.direction, opts.quad_nodes);
  row.w_min = std::numeric_limits<double>::infinity();
  row.w_max = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < pack.w.components(); ++c)
    for (int n = 0; n < grid.node_count(); ++n)
      if (pack.cap.contains(n)) {
        row.w_min = std::min(row.w_min, pack.w.at(c, n));
        row.w_max = std::max(row.w_max, pack.w.at(c, n));
      }

  const auto bs = LinearizedOperator::from_potential(gp, pack.b_sym);
  const SymmetricSpectrum sp = symmetric_spectrum(bs, pack.cap, 1, warm, opts.eigen);
  row.lambda_sym_bs = sp.eigenvalues[0];
  warm = sp.eigenfields;

  // Odd extension of the cap eigenfield across T(e).
  const VectorField& phi = sp.eigenfields[0];
  VectorField odd = phi - phi.permuted(reflect_map(grid, row.direction));
  row.odd_q_cap = quadratic_form(bs, phi, pack.cap);
  row.odd_q_full = quadratic_form(bs, odd, Region::full(grid));

  const auto b = LinearizedOperator::from_potential(gp, pack.b);
  row.lambda_sym_b = symmetric_spectrum(b, pack.cap, 1, sp.eigenfields, opts.eigen).eigenvalues[0];
  if (opts.principal) {
    try {
      PrincipalOptions popts;
      popts.lower_bound = row.lambda_sym_b;
      row.lambda_principal_b = principal_eigenvalue(b, pack.cap, popts).eigenvalue;
    } catch (const EigenError& e) {
      row.error = e.what();
    }
  }
}

}  // namespace

DirectionScan direction_scan(const Solution& solution, const DirectionScanOptions& opts) {
  const Grid& grid = solution.field.grid();
  const int nd = grid.ntheta;
  DirectionScan scan;
  scan.tol_eig = opts.tol_eig < 0 ? default_tol_eig(grid) : opts.tol_eig;
  scan.rows.resize(nd);
  for (int k = 0; k < nd; ++k) {
    scan.rows[k].direction = Direction{k};
    scan.rows[k].angle = Direction{k}.angle(grid);
  }
  const std::vector<int> step = rotate_map(grid, -1);

  // Each thread sweeps a contiguous block of directions, warm-starting every
  // cap eigensolve from the previous direction's eigenfield rotated by one.
#pragma omp parallel
  {
    const int threads = omp_get_num_threads();
    const int t = omp_get_thread_num();
    const int lo = static_cast<int>(static_cast<long>(nd) * t / threads);
    const int hi = static_cast<int>(static_cast<long>(nd) * (t + 1) / threads);
    std::vector<VectorField> warm;
    for (int k = lo; k < hi; ++k) {
      for (auto& f : warm) f = f.permuted(step);
      try {
        scan_direction(solution, opts, scan.rows[k], warm);
      } catch (const std::exception& e) {
        scan.rows[k].error = e.what();
        warm.clear();
      }
    }
  }

  scan.best_value = -std::numeric_limits<double>::infinity();
  for (const auto& row : scan.rows)
    if (row.lambda_sym_bs && *row.lambda_sym_bs > scan.best_value) {
      scan.best_value = *row.lambda_sym_bs;
      scan.best_direction = row.direction;
    }
  scan.exists_nonnegative = scan.best_value >= -scan.tol_eig;
  scan.verdict = scan.exists_nonnegative ? "exists-nonnegative-direction" : "no-nonnegative-direction";
  return scan;
}

RotatingPlaneScan rotating_plane_scan(const Solution& solution, Direction base, double pos_tol_rel) {
  const VectorField& u = solution.field;
  const Grid& grid = u.grid();
  const int m = u.components();
  const int steps = grid.ntheta / 2;

  std::vector<double> tol(m);
  for (int c = 0; c < m; ++c) {
    double top = 0.0;
    for (double v : u.component(c)) top = std::max(top, std::abs(v));
    tol[c] = pos_tol_rel * (top > 0 ? top : std::max(u.max_abs(), 1e-300));
  }

  RotatingPlaneScan scan;
  scan.base = Direction{grid.wrap(base.angle_index)};
  scan.pos_tol_rel = pos_tol_rel;
  scan.rows.resize(steps);
#pragma omp parallel for schedule(static)
  for (int t = 0; t < steps; ++t) {
    SignSummary& row = scan.rows[t];
    row.direction = Direction{grid.wrap(scan.base.angle_index + t)};
    row.angle = t * grid.dtheta;
    const Region cap = Region::cap(grid, row.direction);
    const std::vector<int> sigma = reflect_map(grid, row.direction);
    row.min.assign(m, std::numeric_limits<double>::infinity());
    row.max.assign(m, -std::numeric_limits<double>::infinity());
    for (int n = 0; n < grid.node_count(); ++n) {
      if (!cap.contains(n)) continue;
      for (int c = 0; c < m; ++c) {
        const double w = u.at(c, n) - u.at(c, sigma[n]);
        row.min[c] = std::min(row.min[c], w);
        row.max[c] = std::max(row.max[c], w);
        if (w > 0)
          row.positive_mass += grid.cell_weights[n] * w;
        else
          row.negative_mass -= grid.cell_weights[n] * w;
      }
    }
    row.strictly_positive = true;
    row.vanishing = true;
    for (int c = 0; c < m; ++c) {
      if (!(row.min[c] > tol[c])) row.strictly_positive = false;
      if (std::max(std::abs(row.min[c]), std::abs(row.max[c])) > tol[c]) row.vanishing = false;
    }
  }

  scan.identically_symmetric = std::all_of(scan.rows.begin(), scan.rows.end(), [](const SignSummary& r) { return r.vanishing; });
  if (!scan.identically_symmetric) {
    for (const auto& row : scan.rows) {
      if (!row.strictly_positive) {
        scan.theta0_estimate = row.angle;
        break;
      }
      scan.last_positive_theta = row.angle;
    }
  }
  if (scan.theta0_estimate) {
    const int t = static_cast<int>(std::lround(*scan.theta0_estimate / grid.dtheta));
    const Direction e{grid.wrap(scan.base.angle_index + t)};
    try {
      scan.principal_at_theta0 =
          principal_eigenvalue(LinearizedOperator::at_solution(solution), Region::cap(grid, e)).eigenvalue;
    } catch (const EigenError&) {
      scan.principal_at_theta0.reset();
    }
  }
  return scan;
}

}  // namespace coopsym
