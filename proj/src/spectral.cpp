#include "coopsym/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "coopsym/error.hpp"
#include "coopsym/kernels.hpp"

namespace coopsym {

using ColSparse = Eigen::SparseMatrix<double>;

LinearizedOperator LinearizedOperator::at_solution(const Solution& solution) {
  return from_potential(solution.field.grid_ptr(),
                        kernels::parallel::jacobian(solution.problem, solution.field).negated());
}

LinearizedOperator LinearizedOperator::from_potential(GridPtr grid, MatrixField potential) {
  if (!grid) throw InvalidArgument("linearized operator needs a grid");
  if (potential.nodes != grid->node_count()) throw InvalidArgument("potential does not match the grid");
  for (double v : potential.values)
    if (!std::isfinite(v)) throw InvalidArgument("non-finite potential");
  return LinearizedOperator{std::move(grid), std::move(potential)};
}

namespace {

// Region nodes and the local unknown numbering c * size + local.
struct Restriction {
  std::vector<int> nodes;
  std::vector<int> local;
  int m = 1;

  Restriction(const Grid& grid, const Region& region, int components) : nodes(region.nodes()), m(components) {
    if (static_cast<int>(region.member.size()) != grid.node_count())
      throw InvalidArgument("region does not match the grid");
    if (nodes.empty()) throw InvalidArgument("empty region");
    local.assign(grid.node_count(), -1);
    for (size_t k = 0; k < nodes.size(); ++k) local[nodes[k]] = static_cast<int>(k);
  }
  int count() const { return static_cast<int>(nodes.size()); }
  int dim() const { return count() * m; }
  int index(int c, int l) const { return c * count() + l; }
};

// K_R + W_R P_R, or its strong form W_R^{-1} K_R + P_R.
ColSparse assemble(const Grid& grid, const Restriction& rs, const MatrixField& pot, bool strong) {
  const SparseOperator k = stiffness(grid);
  const int m = rs.m;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<size_t>(rs.count()) * m * (5 + m));
  for (int l = 0; l < rs.count(); ++l) {
    const int node = rs.nodes[l];
    const double w = grid.cell_weights[node];
    const double scale = strong ? 1.0 / w : 1.0;
    for (SparseMatrix::InnerIterator it(k.matrix, node); it; ++it) {
      const int col = rs.local[it.col()];
      if (col < 0) continue;
      for (int c = 0; c < m; ++c) t.emplace_back(rs.index(c, l), rs.index(c, col), scale * it.value());
    }
    const double pw = strong ? 1.0 : w;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double v = pot(node, i, j);
        if (v != 0.0) t.emplace_back(rs.index(i, l), rs.index(j, l), pw * v);
      }
  }
  ColSparse a(rs.dim(), rs.dim());
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

Eigen::VectorXd mass(const Grid& grid, const Restriction& rs) {
  Eigen::VectorXd w(rs.dim());
  for (int c = 0; c < rs.m; ++c)
    for (int l = 0; l < rs.count(); ++l) w[rs.index(c, l)] = grid.cell_weights[rs.nodes[l]];
  return w;
}

VectorField expand(const GridPtr& grid, const Restriction& rs, const Eigen::VectorXd& x) {
  VectorField f(grid, rs.m);
  for (int c = 0; c < rs.m; ++c)
    for (int l = 0; l < rs.count(); ++l) f.at(c, rs.nodes[l]) = x[rs.index(c, l)];
  return f;
}

Eigen::VectorXd compress(const Restriction& rs, const VectorField& f) {
  Eigen::VectorXd x(rs.dim());
  for (int c = 0; c < rs.m; ++c)
    for (int l = 0; l < rs.count(); ++l) x[rs.index(c, l)] = f.at(c, rs.nodes[l]);
  return x;
}

void normalize_sign(Eigen::Ref<Eigen::VectorXd> x) {
  Eigen::Index arg = 0;
  x.cwiseAbs().maxCoeff(&arg);
  if (x[arg] < 0) x = -x;
}

// min over region nodes of the smallest eigenvalue of the node block.
double potential_floor(const Restriction& rs, const MatrixField& pot) {
  double lo = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd block(rs.m, rs.m);
  for (int node : rs.nodes) {
    for (int i = 0; i < rs.m; ++i)
      for (int j = 0; j < rs.m; ++j) block(i, j) = pot(node, i, j);
    if (rs.m == 1) {
      lo = std::min(lo, block(0, 0));
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block, Eigen::EigenvaluesOnly);
      lo = std::min(lo, es.eigenvalues()[0]);
    }
  }
  return lo;
}

SymmetricSpectrum dense_spectrum(const GridPtr& grid, const Restriction& rs, const ColSparse& a,
                                 const Eigen::VectorXd& w, int k) {
  const Eigen::VectorXd isw = w.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd s = isw.asDiagonal() * Eigen::MatrixXd(a) * isw.asDiagonal();
  s = 0.5 * (s + s.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success) throw EigenError(EigenError::Kind::NonConvergence, "dense eigensolver failed");
  SymmetricSpectrum out;
  out.dense = true;
  for (int j = 0; j < k; ++j) {
    out.eigenvalues.push_back(es.eigenvalues()[j]);
    Eigen::VectorXd x = isw.cwiseProduct(es.eigenvectors().col(j));
    normalize_sign(x);
    out.eigenfields.push_back(expand(grid, rs, x));
  }
  return out;
}

// Shift-invert block subspace iteration with Rayleigh-Ritz on
// S = W^{-1/2} A W^{-1/2}.  The shift stays below lambda_1, so A - sigma W is
// positive definite and a Cholesky factorization doubles as the certificate.
SymmetricSpectrum iterative_spectrum(const GridPtr& grid, const Restriction& rs, const ColSparse& a,
                                     const Eigen::VectorXd& w, int k, double sigma, const std::vector<VectorField>& start,
                                     const EigenOptions& opts) {
  const int n = rs.dim();
  const int b = std::min(n, std::max(k + 4, 2 * k));
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::VectorXd isw = sw.cwiseInverse();

  ColSparse wdiag(n, n);
  {
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < n; ++i) t.emplace_back(i, i, w[i]);
    wdiag.setFromTriplets(t.begin(), t.end());
  }

  Eigen::SimplicialLLT<ColSparse> llt;
  auto factor = [&](double s) {
    llt.compute(a - s * wdiag);
    return llt.info() == Eigen::Success;
  };
  if (!factor(sigma))
    throw EigenError(EigenError::Kind::FactorizationFailed, "shifted operator is not positive definite");

  Eigen::MatrixXd x(n, b);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int j = 0; j < b; ++j) {
    if (j < static_cast<int>(start.size()))
      x.col(j) = sw.cwiseProduct(compress(rs, start[j]));
    else
      for (int i = 0; i < n; ++i) x(i, j) = uni(rng);
  }

  auto apply_s = [&](const Eigen::MatrixXd& y) -> Eigen::MatrixXd {
    return isw.asDiagonal() * (a * (isw.asDiagonal() * y));
  };

  double snorm = 0.0;  // ||S||_inf
  {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(n);
    for (int col = 0; col < a.outerSize(); ++col)
      for (ColSparse::InnerIterator it(a, col); it; ++it) rows[it.row()] += std::abs(it.value()) * isw[it.row()] * isw[col];
    snorm = rows.maxCoeff();
  }
  // Residuals cannot drop below the rounding level of S; near-zero
  // eigenvalues would otherwise stall just above an absolute tolerance.
  const double floor = 4.0 * std::numeric_limits<double>::epsilon() * snorm;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(b);
  int iter = 0;
  double last_shift_gap = std::numeric_limits<double>::infinity();
  for (; iter < opts.max_iters; ++iter) {
    Eigen::MatrixXd y = sw.asDiagonal() * llt.solve(sw.asDiagonal() * x);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, b);
    Eigen::MatrixXd sq = apply_s(q);
    Eigen::MatrixXd h = q.transpose() * sq;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    theta = es.eigenvalues();
    x = q * es.eigenvectors();
    const Eigen::MatrixXd sx = sq * es.eigenvectors();

    bool done = true;
    double r0 = 0.0;
    for (int j = 0; j < k; ++j) {
      const double r = (sx.col(j) - theta[j] * x.col(j)).norm();
      if (j == 0) r0 = r;
      if (r > std::max(floor, opts.residual_tol * std::max(1.0, std::abs(theta[j])))) done = false;
    }
    if (done) break;

    // Move the shift toward theta_1 while keeping it certifiably below lambda_1.
    if (iter >= 2 && (iter - 2) % 8 == 0) {
      const double spread = theta[std::min(k, b - 1)] - theta[0];
      const double target = theta[0] - std::max({2.0 * r0, 0.05 * spread, 1e-6 * std::max(1.0, std::abs(theta[0]))});
      const double gap = theta[0] - target;
      if (target > sigma && gap < 0.5 * last_shift_gap && gap < 0.5 * (theta[0] - sigma)) {
        if (factor(target)) {
          sigma = target;
          last_shift_gap = gap;
        } else if (!factor(sigma)) {
          throw EigenError(EigenError::Kind::FactorizationFailed, "lost the shifted factorization");
        }
      }
    }
  }
  if (iter >= opts.max_iters)
    throw EigenError(EigenError::Kind::NonConvergence, "subspace iteration did not converge");

  SymmetricSpectrum out;
  out.iterations = iter + 1;
  for (int j = 0; j < k; ++j) {
    out.eigenvalues.push_back(theta[j]);
    Eigen::VectorXd v = isw.cwiseProduct(x.col(j));
    v /= std::sqrt(v.dot(w.cwiseProduct(v)));
    normalize_sign(v);
    out.eigenfields.push_back(expand(grid, rs, v));
  }
  return out;
}

}  // namespace

double quadratic_form(const LinearizedOperator& op, const VectorField& psi, const Region& region) {
  const Grid& grid = *op.grid;
  if (psi.node_count() != grid.node_count() || psi.components() != op.components())
    throw InvalidArgument("field does not match the operator");
  if (static_cast<int>(region.member.size()) != grid.node_count()) throw InvalidArgument("region does not match the grid");
  for (int c = 0; c < psi.components(); ++c)
    for (int n = 0; n < grid.node_count(); ++n)
      if (!region.contains(n) && psi.at(c, n) != 0.0) throw InvalidArgument("field does not vanish outside the region");

  const SparseOperator k = stiffness(grid);
  const int m = op.components();
  double q = 0.0;
  for (int c = 0; c < m; ++c) {
    const auto v = psi.component(c);
    for (int row = 0; row < grid.node_count(); ++row) {
      if (v[row] == 0.0) continue;
      double s = 0.0;
      for (SparseMatrix::InnerIterator it(k.matrix, row); it; ++it) s += it.value() * v[it.col()];
      q += v[row] * s;
    }
  }
  for (int n = 0; n < grid.node_count(); ++n) {
    if (!region.contains(n)) continue;
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) s += psi.at(i, n) * op.potential(n, i, j) * psi.at(j, n);
    q += grid.cell_weights[n] * s;
  }
  return q;
}

SymmetricSpectrum symmetric_spectrum(const LinearizedOperator& op, const Region& region, int k,
                                     const EigenOptions& opts) {
  return symmetric_spectrum(op, region, k, {}, opts);
}

SymmetricSpectrum symmetric_spectrum(const LinearizedOperator& op, const Region& region, int k,
                                     const std::vector<VectorField>& start, const EigenOptions& opts) {
  if (k < 1) throw InvalidArgument("need k >= 1 eigenvalues");
  const Grid& grid = *op.grid;
  const Restriction rs(grid, region, op.components());
  k = std::min(k, rs.dim());
  const MatrixField c = op.symmetric_potential();
  const ColSparse a = assemble(grid, rs, c, false);
  const Eigen::VectorXd w = mass(grid, rs);
  SymmetricSpectrum out;
  if (rs.dim() <= opts.dense_threshold) {
    out = dense_spectrum(op.grid, rs, a, w, k);
  } else {
    out = iterative_spectrum(op.grid, rs, a, w, k, potential_floor(rs, c) - 1.0, start, opts);
  }
  out.region = region.label;
  return out;
}

std::optional<int> inertia_count(const LinearizedOperator& op, const Region& region, double shift) {
  const Grid& grid = *op.grid;
  const Restriction rs(grid, region, op.components());
  ColSparse a = assemble(grid, rs, op.symmetric_potential(), false);
  const Eigen::VectorXd w = mass(grid, rs);
  for (int i = 0; i < rs.dim(); ++i) a.coeffRef(i, i) -= shift * w[i];
  Eigen::SimplicialLDLT<ColSparse> ldlt(a);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd d = ldlt.vectorD();
  int neg = 0;
  for (int i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i]) || d[i] == 0.0) return std::nullopt;
    if (d[i] < 0) ++neg;
  }
  return neg;
}

double default_tol_eig(const Grid& grid) {
  return 1e-6 * first_laplacian_eigenvalue(grid);
}

MorseResult morse_index(const LinearizedOperator& op, const Region& region, double tol_eig, const EigenOptions& opts) {
  MorseResult res;
  res.tol_eig = tol_eig;
  std::vector<VectorField> warm;
  const int dim = region.size() * op.components();
  for (int k : {4, 8, 12}) {
    const int kk = std::min(k, dim);
    const SymmetricSpectrum sp = symmetric_spectrum(op, region, kk, warm, opts);
    warm = sp.eigenfields;
    res.eigenvalues = sp.eigenvalues;
    if (sp.eigenvalues.back() > tol_eig || kk == dim || k == 12) break;
  }
  res.index = 0;
  res.inconclusive = false;
  for (double v : res.eigenvalues) {
    if (v < -tol_eig) {
      ++res.index;
    } else if (v <= tol_eig && !res.inconclusive) {
      res.inconclusive = true;
      res.ambiguous_value = v;
    }
  }
  if (res.eigenvalues.back() < -tol_eig && static_cast<int>(res.eigenvalues.size()) < dim) {
    // More than twelve negative eigenvalues: the count is only a lower bound.
    res.inconclusive = true;
    res.ambiguous_value = res.eigenvalues.back();
  }
  res.inertia_index = inertia_count(op, region, -tol_eig);
  return res;
}

MorseResult morse_index(const Solution& solution, double tol_eig, const EigenOptions& opts) {
  const LinearizedOperator op = LinearizedOperator::at_solution(solution);
  return morse_index(op, Region::full(solution.field.grid()), tol_eig, opts);
}

PrincipalPair principal_eigenvalue(const LinearizedOperator& op, const Region& region, const PrincipalOptions& opts) {
  const Grid& grid = *op.grid;
  const int m = op.components();
  const Restriction rs(grid, region, m);
  double s = 0.0;
  for (int node : rs.nodes)
    for (int i = 0; i < m; ++i) {
      double row = std::abs(op.potential(node, i, i));
      for (int j = 0; j < m; ++j) {
        if (j == i) continue;
        const double d = op.potential(node, i, j);
        if (d > opts.cooperative_tol)
          throw EigenError(EigenError::Kind::NotCooperative,
                           "positive off-diagonal potential entry " + std::to_string(d) + " at node " +
                               std::to_string(node));
        row += std::abs(d);
      }
      s = std::max(s, row);
    }
  s += 1.0;

  const ColSparse a = assemble(grid, rs, op.potential, true);
  const int n = rs.dim();
  ColSparse id(n, n);
  id.setIdentity();

  Eigen::SparseLU<ColSparse, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  auto factor = [&](double tau) {
    const ColSparse shifted = a - tau * id;
    if (!analyzed) {
      lu.analyzePattern(shifted);
      analyzed = true;
    }
    lu.factorize(shifted);
    return lu.info() == Eigen::Success;
  };

  double tau = -s;
  if (opts.lower_bound) tau = std::max(tau, *opts.lower_bound - 1e-3 * std::max(1.0, std::abs(*opts.lower_bound)));
  if (!factor(tau)) throw EigenError(EigenError::Kind::FactorizationFailed, "shifted M-matrix factorization failed");
  double safe_tau = tau;

  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  x /= x.norm();
  double lambda = std::numeric_limits<double>::quiet_NaN();
  int shifts = 0;
  int since_shift = 0;
  int iter = 0;
  for (; iter < opts.max_iters; ++iter, ++since_shift) {
    Eigen::VectorXd y = lu.solve(x);
    if (lu.info() != Eigen::Success || !y.allFinite())
      throw EigenError(EigenError::Kind::FactorizationFailed, "shifted solve failed");
    if (y.sum() < 0) y = -y;
    const double ymax = y.cwiseAbs().maxCoeff();
    if (y.minCoeff() < -1e-9 * ymax) {
      // Inverse no longer nonnegative: the shift passed lambda_1.
      tau = 0.5 * (tau + safe_tau);
      if (!factor(tau)) throw EigenError(EigenError::Kind::FactorizationFailed, "shifted factorization failed");
      x = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
      since_shift = 0;
      continue;
    }
    const double rho = x.dot(y);
    const double next = tau + 1.0 / rho;
    const Eigen::VectorXd xn = y / y.norm();
    const double dx = (xn - x).cwiseAbs().maxCoeff() / xn.cwiseAbs().maxCoeff();
    const double dl = std::abs(next - lambda);
    x = xn;
    lambda = next;
    if (dl <= opts.tol * std::max(1.0, std::abs(lambda)) && dx <= 1e-11) break;
    // Wielandt shift toward the current estimate.
    if (since_shift >= 4 && shifts < 6 && dl <= 1e-3 * std::max(1.0, std::abs(lambda))) {
      const double target = lambda - 0.01 * (lambda - tau);
      if (factor(target)) {
        safe_tau = tau;
        tau = target;
        ++shifts;
        since_shift = 0;
      } else if (!factor(tau)) {
        throw EigenError(EigenError::Kind::FactorizationFailed, "shifted factorization failed");
      }
    }
  }
  if (iter >= opts.max_iters)
    throw EigenError(EigenError::Kind::NonConvergence, "inverse iteration did not converge");

  PrincipalPair out;
  out.eigenvalue = lambda;
  out.iterations = iter + 1;
  x /= x.cwiseAbs().maxCoeff();
  const Eigen::VectorXd ax = a * x;
  out.lower_bound = std::numeric_limits<double>::infinity();
  out.upper_bound = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    if (x[i] > 1e-8) {
      out.lower_bound = std::min(out.lower_bound, ax[i] / x[i]);
      out.upper_bound = std::max(out.upper_bound, ax[i] / x[i]);
    }
  out.field = expand(op.grid, rs, x);
  return out;
}

ProbeReport maximum_principle_probe(const LinearizedOperator& op, const Region& region, int trials, std::uint64_t seed,
                                    double tol) {
  const Grid& grid = *op.grid;
  const Restriction rs(grid, region, op.components());
  const ColSparse a = assemble(grid, rs, op.potential, false);
  const Eigen::VectorXd w = mass(grid, rs);
  Eigen::SparseLU<ColSparse, Eigen::COLAMDOrdering<int>> lu(a);
  if (lu.info() != Eigen::Success) throw SolverError(SolverError::Kind::SingularJacobian, "probe operator is singular");

  ProbeReport rep;
  rep.region = region.label;
  rep.trials = trials;
  rep.tol = tol;
  rep.worst_max = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 0.0);
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd g(rs.dim());
    for (int i = 0; i < g.size(); ++i) g[i] = uni(rng);
    const Eigen::VectorXd u = lu.solve(w.cwiseProduct(g));
    const double top = u.maxCoeff();
    rep.worst_max = std::max(rep.worst_max, top);
    if (top <= tol) ++rep.passed;
  }
  rep.lambda1_sym = symmetric_spectrum(op, region, 1).eigenvalues[0];
  try {
    rep.lambda1_principal = principal_eigenvalue(op, region).eigenvalue;
  } catch (const EigenError&) {
    rep.lambda1_principal.reset();
  }
  rep.consistent = !(rep.lambda1_sym > default_tol_eig(grid)) || rep.passed == rep.trials;
  return rep;
}

SpectralReport spectral_report(const Solution& solution, int k, const EigenOptions& opts) {
  const LinearizedOperator op = LinearizedOperator::at_solution(solution);
  const Grid& grid = solution.field.grid();
  const Region full = Region::full(grid);
  SpectralReport rep;
  rep.region = full.label;
  rep.tol_eig = default_tol_eig(grid);
  SymmetricSpectrum sp = symmetric_spectrum(op, full, k, opts);
  rep.eigenvalues = sp.eigenvalues;
  rep.eigenfields = std::move(sp.eigenfields);
  rep.morse = morse_index(op, full, rep.tol_eig, opts);
  try {
    PrincipalOptions popts;
    if (!rep.eigenvalues.empty()) popts.lower_bound = rep.eigenvalues.front();
    PrincipalPair pp = principal_eigenvalue(op, full, popts);
    rep.principal_eigenvalue = pp.eigenvalue;
    rep.principal_field = std::move(pp.field);
  } catch (const EigenError& e) {
    rep.principal_note = e.what();
  }
  return rep;
}

}  // namespace coopsym
