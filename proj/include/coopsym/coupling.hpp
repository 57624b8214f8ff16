#pragma once

#include <optional>
#include <vector>

#include "coopsym/field.hpp"
#include "coopsym/grid.hpp"
#include "coopsym/solver.hpp"

namespace coopsym {

/// adjacency[i][j] != 0 means an edge j -> i (f_i depends increasingly on u_j).
struct Digraph {
  int m = 0;
  std::vector<std::vector<char>> adjacency;

  explicit Digraph(int size = 0) : m(size), adjacency(size, std::vector<char>(size, 0)) {}
  bool edge(int from, int to) const { return adjacency[to][from] != 0; }
};

/// Every vertex reaches every other one.  A single vertex is strongly connected.
bool strongly_connected(const Digraph& g);

/// Edge j -> i when entries(node, i, j) > tol on region nodes of total cell
/// weight > weight_tol.  Diagonal entries are ignored.
Digraph positivity_digraph(const Grid& grid, const MatrixField& entries, const Region& region, double tol,
                           double weight_tol);

struct CouplingOptions {
  double tol = 1e-12;
  /// Negative selects 10 times the smallest cell weight.
  double weight_tol = -1.0;
};

struct IdentityResiduals {
  /// sum_j (df_i/du_j - df_j/du_i) du_j/dtheta, one component per equation.
  VectorField field;
  double max_norm = 0.0;
  double l2_norm = 0.0;
  /// m = 2: df_1/du_2 - df_2/du_1 (for the power system this is p|u2|^{p-1} - q|u1|^{q-1}).
  std::optional<VectorField> pair_field;
  double pair_max = 0.0;
  double pair_l2 = 0.0;
  /// |U_theta| per node, the scale linking the two residuals.
  VectorField angular_speed;
};

struct CouplingReport {
  bool weakly_coupled = true;
  /// Smallest off-diagonal Jacobian entry over the region (0 when m = 1).
  double worst_offdiagonal = 0.0;
  bool fully_coupled = true;
  Digraph digraph;
  double tol = 0.0;
  double weight_tol = 0.0;
  std::optional<IdentityResiduals> identity;
};

/// Angular centered differences (u(theta + dtheta) - u(theta - dtheta)) / (2 dtheta).
VectorField angular_derivative(const VectorField& u);

IdentityResiduals identity_residual(const Problem& problem, const VectorField& u);
IdentityResiduals identity_residual(const Solution& solution);

CouplingReport check_coupling(const Solution& solution, const Region& region, const CouplingOptions& opts = {});

}  // namespace coopsym
