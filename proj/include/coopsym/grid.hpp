#pragma once

// Polar finite-volume discretization of a disk or an annulus.
//
// Unknowns live at cell centers r_i = r_inner + (i + 1/2) dr and at the
// angles theta_j = j dtheta, j = 0..ntheta-1.  Nodes are numbered radial-major:
// node = i * ntheta + j.  Dirichlet data on the circles r = r_outer (and
// r = r_inner for an annulus) is imposed through mirrored ghost cells.  With
// ntheta divisible by 4 every reflection across a line through a grid angle
// maps nodes onto nodes, so caps and reflected fields are exact index sets.

#include <memory>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

namespace coopsym {

enum class DomainKind { Disk, Annulus };

struct Domain {
  DomainKind kind = DomainKind::Disk;
  double r_inner = 0.0;
  double r_outer = 1.0;

  static Domain disk(double radius);
  static Domain annulus(double r_inner, double r_outer);

  /// Throws InvalidArgument unless r_outer > r_inner >= 0 and the kind matches.
  void validate() const;
  double area() const;
};

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

struct Grid {
  Domain domain;
  int nr = 0;
  int ntheta = 0;
  double dr = 0.0;
  double dtheta = 0.0;
  std::vector<double> r_nodes;
  std::vector<double> theta_nodes;
  /// r_i * dr * dtheta for every node, radial-major.
  std::vector<double> cell_weights;

  int node_count() const { return nr * ntheta; }
  int node(int i, int j) const { return i * ntheta + j; }
  int ring_of(int node) const { return node / ntheta; }
  int angle_of(int node) const { return node % ntheta; }
  double radius(int node) const { return r_nodes[ring_of(node)]; }
  /// Wraps any integer angle index into [0, ntheta).
  int wrap(int j) const { return ((j % ntheta) + ntheta) % ntheta; }
};

using GridPtr = std::shared_ptr<const Grid>;

/// Direction e = (cos phi_k, sin phi_k) with phi_k = 2 pi k / ntheta.
struct Direction {
  int angle_index = 0;

  double angle(const Grid& grid) const;
  Direction opposite(const Grid& grid) const;
  bool operator==(const Direction&) const = default;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct SparseOperator {
  SparseMatrix matrix;
  bool symmetric = false;

  int dimension() const { return static_cast<int>(matrix.rows()); }
};

/// A subset of grid nodes; everything outside is closed by zero Dirichlet data.
struct Region {
  std::string label;
  std::vector<char> member;

  static Region full(const Grid& grid);
  static Region cap(const Grid& grid, Direction e);
  /// Nodes with r_i < radius (a concentric sub-disk, or inner shell of an annulus).
  static Region inner_disk(const Grid& grid, double radius);
  static Region from_nodes(const Grid& grid, const std::vector<int>& nodes, std::string label);

  bool contains(int node) const { return member[node] != 0; }
  std::vector<int> nodes() const;
  int size() const;
};

Grid build_grid(const Domain& domain, int nr, int ntheta);

/// Strong-form -Delta_h.  Not symmetric entrywise; symmetric in the
/// cell-weighted inner product.
SparseOperator laplacian(const Grid& grid);

/// Weighted form K = W * (-Delta_h) with W = diag(cell_weights).  Exactly
/// symmetric; this is the matrix every eigenproblem is assembled from.
SparseOperator stiffness(const Grid& grid);

/// Node permutation of the reflection across T(e).  Involution; fixes the
/// nodes lying on T(e); preserves |x|.
std::vector<int> reflect_map(const Grid& grid, Direction e);

/// Node permutation rotating by `shift` angle indices: (i, j) -> (i, j + shift).
std::vector<int> rotate_map(const Grid& grid, int shift);

/// Sorted node indices with x . e > 0 (nodes on T(e) excluded).
std::vector<int> cap_mask(const Grid& grid, Direction e);

/// Smallest Dirichlet eigenvalue of -Delta_h on the whole grid; used to scale
/// eigenvalue sign tolerances.
double first_laplacian_eigenvalue(const Grid& grid);

}  // namespace coopsym
