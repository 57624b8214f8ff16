#pragma once

// Node-wise kernels shared by the solver, the spectral module and the
// reflection machinery.  Each kernel exists twice: `serial` is the reference
// implementation used by the tests, `parallel` is the OpenMP version the
// library calls.  Every node is computed independently with the same
// arithmetic, so both produce bit-identical results for any thread count.

#include <vector>

#include "coopsym/field.hpp"
#include "coopsym/grid.hpp"
#include "coopsym/problems.hpp"

namespace coopsym::kernels {

/// Gauss-Legendre rule mapped to [0, 1].
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

Quadrature gauss_legendre(int points);

namespace serial {

VectorField nonlinearity(const Problem& problem, const VectorField& u);
MatrixField jacobian(const Problem& problem, const VectorField& u);
/// B(x) = -int_0^1 J_F(|x|, t U(x) + (1 - t) V(x)) dt by the given rule.
MatrixField mean_value_coefficients(const Problem& problem, const VectorField& u, const VectorField& v,
                                    const Quadrature& rule);
/// B^s(x) = -(J_F(|x|, U(x)) + J_F(|x|, V(x))) / 2.
MatrixField endpoint_coefficients(const Problem& problem, const VectorField& u, const VectorField& v);
/// Applies a scalar node operator to every component.
VectorField apply(const SparseOperator& op, const VectorField& u);

}  // namespace serial

namespace parallel {

VectorField nonlinearity(const Problem& problem, const VectorField& u);
MatrixField jacobian(const Problem& problem, const VectorField& u);
MatrixField mean_value_coefficients(const Problem& problem, const VectorField& u, const VectorField& v,
                                    const Quadrature& rule);
MatrixField endpoint_coefficients(const Problem& problem, const VectorField& u, const VectorField& v);
VectorField apply(const SparseOperator& op, const VectorField& u);

}  // namespace parallel

}  // namespace coopsym::kernels
