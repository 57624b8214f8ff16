#include "coopsym/kernels.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include "coopsym/error.hpp"

namespace coopsym::kernels {

Quadrature gauss_legendre(int points) {
  if (points < 1) throw InvalidArgument("quadrature needs at least one point");
  // Boost returns the nonnegative zeros of P_n in increasing order.
  const auto zeros = boost::math::legendre_p_zeros<double>(points);
  std::vector<double> x;
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it)
    if (*it != 0.0) x.push_back(-*it);
  for (double z : zeros) x.push_back(z);

  Quadrature q;
  for (double xi : x) {
    const double dp = boost::math::legendre_p_prime<double>(points, xi);
    const double w = 2.0 / ((1.0 - xi * xi) * dp * dp);
    q.nodes.push_back(0.5 * (xi + 1.0));
    q.weights.push_back(0.5 * w);
  }
  return q;
}

namespace {

void require_compatible(const Problem& problem, const VectorField& u) {
  if (u.components() != problem.components())
    throw InvalidArgument("field component count does not match the problem");
  if (!u.all_finite()) throw InvalidArgument("non-finite field passed to a kernel");
}

void nonlinearity_at(const Problem& problem, const VectorField& u, VectorField& out, int n) {
  const int m = u.components();
  double state[16], value[16];
  for (int c = 0; c < m; ++c) state[c] = u.at(c, n);
  problem.impl().F(u.grid().radius(n), std::span<const double>(state, m), std::span<double>(value, m));
  for (int c = 0; c < m; ++c) out.at(c, n) = value[c];
}

void jacobian_at(const Problem& problem, const VectorField& u, MatrixField& out, int n) {
  const int m = u.components();
  double state[16];
  for (int c = 0; c < m; ++c) state[c] = u.at(c, n);
  problem.impl().J(u.grid().radius(n), std::span<const double>(state, m), out.at(n));
}

void mean_value_at(const Problem& problem, const VectorField& u, const VectorField& v, const Quadrature& rule,
                   MatrixField& out, int n) {
  const int m = u.components();
  const double r = u.grid().radius(n);
  double state[16], jac[256];
  auto block = out.at(n);
  for (int k = 0; k < m * m; ++k) block[k] = 0.0;
  for (size_t q = 0; q < rule.nodes.size(); ++q) {
    const double t = rule.nodes[q];
    for (int c = 0; c < m; ++c) state[c] = t * u.at(c, n) + (1.0 - t) * v.at(c, n);
    problem.impl().J(r, std::span<const double>(state, m), std::span<double>(jac, m * m));
    for (int k = 0; k < m * m; ++k) block[k] -= rule.weights[q] * jac[k];
  }
}

void endpoint_at(const Problem& problem, const VectorField& u, const VectorField& v, MatrixField& out, int n) {
  const int m = u.components();
  const double r = u.grid().radius(n);
  double state[16], ja[256], jb[256];
  for (int c = 0; c < m; ++c) state[c] = u.at(c, n);
  problem.impl().J(r, std::span<const double>(state, m), std::span<double>(ja, m * m));
  for (int c = 0; c < m; ++c) state[c] = v.at(c, n);
  problem.impl().J(r, std::span<const double>(state, m), std::span<double>(jb, m * m));
  auto block = out.at(n);
  for (int k = 0; k < m * m; ++k) block[k] = -0.5 * (ja[k] + jb[k]);
}

void apply_row(const SparseOperator& op, const VectorField& u, VectorField& out, int c, int row) {
  const auto& a = op.matrix;
  const auto src = u.component(c);
  double s = 0.0;
  for (SparseMatrix::InnerIterator it(a, row); it; ++it) s += it.value() * src[it.col()];
  out.at(c, row) = s;
}

void check_small(int m) {
  if (m > 16) throw InvalidArgument("kernels support at most 16 components");
}

}  // namespace

namespace serial {

VectorField nonlinearity(const Problem& problem, const VectorField& u) {
  require_compatible(problem, u);
  check_small(u.components());
  VectorField out(u.grid_ptr(), u.components());
  for (int n = 0; n < u.node_count(); ++n) nonlinearity_at(problem, u, out, n);
  return out;
}

MatrixField jacobian(const Problem& problem, const VectorField& u) {
  require_compatible(problem, u);
  check_small(u.components());
  MatrixField out(u.node_count(), u.components());
  for (int n = 0; n < u.node_count(); ++n) jacobian_at(problem, u, out, n);
  return out;
}

MatrixField mean_value_coefficients(const Problem& problem, const VectorField& u, const VectorField& v,
                                    const Quadrature& rule) {
  require_compatible(problem, u);
  require_compatible(problem, v);
  check_small(u.components());
  MatrixField out(u.node_count(), u.components());
  for (int n = 0; n < u.node_count(); ++n) mean_value_at(problem, u, v, rule, out, n);
  return out;
}

MatrixField endpoint_coefficients(const Problem& problem, const VectorField& u, const VectorField& v) {
  require_compatible(problem, u);
  require_compatible(problem, v);
  check_small(u.components());
  MatrixField out(u.node_count(), u.components());
  for (int n = 0; n < u.node_count(); ++n) endpoint_at(problem, u, v, out, n);
  return out;
}

VectorField apply(const SparseOperator& op, const VectorField& u) {
  if (op.dimension() != u.node_count()) throw InvalidArgument("operator/field size mismatch");
  VectorField out(u.grid_ptr(), u.components());
  for (int c = 0; c < u.components(); ++c)
    for (int row = 0; row < u.node_count(); ++row) apply_row(op, u, out, c, row);
  return out;
}

}  // namespace serial

namespace parallel {

VectorField nonlinearity(const Problem& problem, const VectorField& u) {
  require_compatible(problem, u);
  check_small(u.components());
  VectorField out(u.grid_ptr(), u.components());
  const int nodes = u.node_count();
#pragma omp parallel for schedule(static)
  for (int n = 0; n < nodes; ++n) nonlinearity_at(problem, u, out, n);
  return out;
}

MatrixField jacobian(const Problem& problem, const VectorField& u) {
  require_compatible(problem, u);
  check_small(u.components());
  MatrixField out(u.node_count(), u.components());
  const int nodes = u.node_count();
#pragma omp parallel for schedule(static)
  for (int n = 0; n < nodes; ++n) jacobian_at(problem, u, out, n);
  return out;
}

MatrixField mean_value_coefficients(const Problem& problem, const VectorField& u, const VectorField& v,
                                    const Quadrature& rule) {
  require_compatible(problem, u);
  require_compatible(problem, v);
  check_small(u.components());
  MatrixField out(u.node_count(), u.components());
  const int nodes = u.node_count();
#pragma omp parallel for schedule(static)
  for (int n = 0; n < nodes; ++n) mean_value_at(problem, u, v, rule, out, n);
  return out;
}

MatrixField endpoint_coefficients(const Problem& problem, const VectorField& u, const VectorField& v) {
  require_compatible(problem, u);
  require_compatible(problem, v);
  check_small(u.components());
  MatrixField out(u.node_count(), u.components());
  const int nodes = u.node_count();
#pragma omp parallel for schedule(static)
  for (int n = 0; n < nodes; ++n) endpoint_at(problem, u, v, out, n);
  return out;
}

VectorField apply(const SparseOperator& op, const VectorField& u) {
  if (op.dimension() != u.node_count()) throw InvalidArgument("operator/field size mismatch");
  VectorField out(u.grid_ptr(), u.components());
  const int nodes = u.node_count();
  for (int c = 0; c < u.components(); ++c) {
#pragma omp parallel for schedule(static)
    for (int row = 0; row < nodes; ++row) apply_row(op, u, out, c, row);
  }
  return out;
}

}  // namespace parallel

}  // namespace coopsym::kernels
