#include "coopsym/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coopsym/error.hpp"
#include "coopsym/kernels.hpp"

namespace coopsym {

namespace {

std::vector<char> reach(const Digraph& g, bool forward) {
  std::vector<char> seen(g.m, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w = 0; w < g.m; ++w) {
      const bool e = forward ? g.edge(v, w) : g.edge(w, v);
      if (e && !seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace

bool strongly_connected(const Digraph& g) {
  if (g.m <= 1) return true;
  const auto f = reach(g, true);
  const auto b = reach(g, false);
  for (int v = 0; v < g.m; ++v)
    if (!f[v] || !b[v]) return false;
  return true;
}

Digraph positivity_digraph(const Grid& grid, const MatrixField& entries, const Region& region, double tol,
                           double weight_tol) {
  const int m = entries.m;
  std::vector<double> weight(static_cast<size_t>(m) * m, 0.0);
  for (int n = 0; n < grid.node_count(); ++n) {
    if (!region.contains(n)) continue;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (i != j && entries(n, i, j) > tol) weight[i * m + j] += grid.cell_weights[n];
  }
  Digraph g(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g.adjacency[i][j] = (i != j && weight[i * m + j] > weight_tol) ? 1 : 0;
  return g;
}

VectorField angular_derivative(const VectorField& u) {
  const Grid& g = u.grid();
  VectorField out(u.grid_ptr(), u.components());
  const double h = 2.0 * g.dtheta;
  for (int c = 0; c < u.components(); ++c)
    for (int i = 0; i < g.nr; ++i)
      for (int j = 0; j < g.ntheta; ++j)
        out.at(c, g.node(i, j)) = (u.at(c, g.node(i, g.wrap(j + 1))) - u.at(c, g.node(i, g.wrap(j - 1)))) / h;
  return out;
}

IdentityResiduals identity_residual(const Problem& problem, const VectorField& u) {
  const int m = u.components();
  const Grid& g = u.grid();
  const MatrixField jac = kernels::parallel::jacobian(problem, u);
  const VectorField ut = angular_derivative(u);

  IdentityResiduals out;
  out.field = VectorField(u.grid_ptr(), m);
  out.angular_speed = VectorField(u.grid_ptr(), 1);
  for (int n = 0; n < g.node_count(); ++n) {
    double speed = 0.0;
    for (int j = 0; j < m; ++j) speed += ut.at(j, n) * ut.at(j, n);
    out.angular_speed.at(0, n) = std::sqrt(speed);
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int j = 0; j < m; ++j) s += (jac(n, i, j) - jac(n, j, i)) * ut.at(j, n);
      out.field.at(i, n) = s;
    }
  }
  out.max_norm = out.field.max_abs();
  out.l2_norm = out.field.weighted_norm();
  if (m == 2) {
    VectorField pair(u.grid_ptr(), 1);
    for (int n = 0; n < g.node_count(); ++n) pair.at(0, n) = jac(n, 0, 1) - jac(n, 1, 0);
    out.pair_max = pair.max_abs();
    out.pair_l2 = pair.weighted_norm();
    out.pair_field = std::move(pair);
  }
  return out;
}

IdentityResiduals identity_residual(const Solution& solution) {
  return identity_residual(solution.problem, solution.field);
}

CouplingReport check_coupling(const Solution& solution, const Region& region, const CouplingOptions& opts) {
  const Grid& grid = solution.field.grid();
  if (static_cast<int>(region.member.size()) != grid.node_count()) throw InvalidArgument("region does not match the grid");
  const MatrixField jac = kernels::parallel::jacobian(solution.problem, solution.field);
  const int m = jac.m;

  CouplingReport rep;
  rep.tol = opts.tol;
  rep.weight_tol = opts.weight_tol;
  if (rep.weight_tol < 0) rep.weight_tol = 10.0 * *std::min_element(grid.cell_weights.begin(), grid.cell_weights.end());

  double worst = m > 1 ? std::numeric_limits<double>::infinity() : 0.0;
  for (int n = 0; n < grid.node_count(); ++n) {
    if (!region.contains(n)) continue;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (i != j) worst = std::min(worst, jac(n, i, j));
  }
  rep.worst_offdiagonal = worst;
  rep.weakly_coupled = worst >= -opts.tol;
  rep.digraph = positivity_digraph(grid, jac, region, opts.tol, rep.weight_tol);
  rep.fully_coupled = rep.weakly_coupled && strongly_connected(rep.digraph);
  if (m >= 2) rep.identity = identity_residual(solution);
  return rep;
}

}  // namespace coopsym
