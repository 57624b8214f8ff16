#pragma once

// Linearized operators -Delta_h + D(x) on a region with zero Dirichlet
// closure, their quadratic forms and eigenvalues.
//
// Every eigenproblem is posed in the weighted form (K + W C) x = lambda W x,
// where K is the symmetric stiffness matrix and W the diagonal cell-weight
// mass matrix, so symmetric eigenfields are W-orthonormal.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coopsym/field.hpp"
#include "coopsym/grid.hpp"
#include "coopsym/solver.hpp"

namespace coopsym {

struct LinearizedOperator {
  GridPtr grid;
  /// D(x), one m x m block per node.
  MatrixField potential;

  /// D = -J_F(|x|, U).
  static LinearizedOperator at_solution(const Solution& solution);
  static LinearizedOperator from_potential(GridPtr grid, MatrixField potential);

  int components() const { return potential.m; }
  /// C = (D + D^t) / 2.
  MatrixField symmetric_potential() const { return potential.symmetrized(); }
  LinearizedOperator symmetrized() const { return from_potential(grid, potential.symmetrized()); }
};

/// Q(psi; region) = sum_c psi_c^t K psi_c + sum_n w_n psi(n)^t D(n) psi(n).
/// Throws InvalidArgument when psi is nonzero outside the region.
double quadratic_form(const LinearizedOperator& op, const VectorField& psi, const Region& region);

struct EigenOptions {
  /// Problems with at most this many unknowns go to the dense solver.
  int dense_threshold = 600;
  int max_iters = 500;
  double residual_tol = 1e-9;
};

struct SymmetricSpectrum {
  std::string region;
  std::vector<double> eigenvalues;
  /// W-orthonormal, zero outside the region, largest-magnitude entry positive.
  std::vector<VectorField> eigenfields;
  int iterations = 0;
  bool dense = false;
};

/// Lowest k eigenpairs of -Delta_h + C on the region.
SymmetricSpectrum symmetric_spectrum(const LinearizedOperator& op, const Region& region, int k,
                                     const EigenOptions& opts = {});

/// Warm-started variant: `start` seeds the subspace (missing columns random).
SymmetricSpectrum symmetric_spectrum(const LinearizedOperator& op, const Region& region, int k,
                                     const std::vector<VectorField>& start, const EigenOptions& opts = {});

/// Number of eigenvalues of -Delta_h + C below `shift` on the region, from the
/// inertia of an LDL^t factorization.  Empty when the factorization fails.
std::optional<int> inertia_count(const LinearizedOperator& op, const Region& region, double shift);

struct MorseResult {
  int index = 0;
  bool inconclusive = false;
  /// First eigenvalue found in [-tol_eig, tol_eig] when inconclusive.
  double ambiguous_value = 0.0;
  std::vector<double> eigenvalues;
  double tol_eig = 0.0;
  /// Sylvester count below -tol_eig, when available.
  std::optional<int> inertia_index;
};

/// Counts eigenvalues < -tol_eig, growing k through 4, 8, 12 until lambda_k > tol_eig.
MorseResult morse_index(const LinearizedOperator& op, const Region& region, double tol_eig,
                        const EigenOptions& opts = {});
MorseResult morse_index(const Solution& solution, double tol_eig, const EigenOptions& opts = {});

/// 1e-6 times the first Dirichlet eigenvalue of -Delta_h on the grid.
double default_tol_eig(const Grid& grid);

struct PrincipalOptions {
  int max_iters = 1000;
  double tol = 1e-12;
  /// Off-diagonal D entries above this violate cooperativity.
  double cooperative_tol = 1e-12;
  /// A known value below the principal eigenvalue (e.g. lambda_1^s, which
  /// never exceeds it); used as the first shift.
  std::optional<double> lower_bound;
};

struct PrincipalPair {
  double eigenvalue = 0.0;
  /// Nonnegative, max-norm 1, zero outside the region.
  VectorField field;
  /// Collatz-Wielandt bounds over nodes where the field exceeds 1e-8.
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  int iterations = 0;
};

/// Perron pair of the non-self-adjoint operator by shifted inverse iteration.
/// Throws EigenError::NotCooperative when some d_ij (i != j) > cooperative_tol.
PrincipalPair principal_eigenvalue(const LinearizedOperator& op, const Region& region,
                                   const PrincipalOptions& opts = {});

struct ProbeReport {
  std::string region;
  int trials = 0;
  int passed = 0;
  /// Largest max_x U(x) over all trials.
  double worst_max = 0.0;
  double lambda1_sym = 0.0;
  std::optional<double> lambda1_principal;
  double tol = 1e-9;
  /// lambda1_sym > tol_eig implies every trial passed.
  bool consistent = true;
};

/// Solves (-Delta_h + D) U = G for random G <= 0 and checks U <= tol.
ProbeReport maximum_principle_probe(const LinearizedOperator& op, const Region& region, int trials,
                                    std::uint64_t seed = 1, double tol = 1e-9);

struct SpectralReport {
  std::string region;
  std::vector<double> eigenvalues;
  std::vector<VectorField> eigenfields;
  MorseResult morse;
  std::optional<double> principal_eigenvalue;
  std::optional<VectorField> principal_field;
  /// Why the principal eigenvalue is missing, if it is.
  std::string principal_note;
  double tol_eig = 0.0;
};

/// Full-domain spectral report of the linearization at a solution.
SpectralReport spectral_report(const Solution& solution, int k = 4, const EigenOptions& opts = {});

}  // namespace coopsym
