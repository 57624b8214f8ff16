#include "coopsym/grid.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "coopsym/error.hpp"

namespace coopsym {

Domain Domain::disk(double radius) {
  Domain d{DomainKind::Disk, 0.0, radius};
  d.validate();
  return d;
}

Domain Domain::annulus(double r_inner, double r_outer) {
  Domain d{DomainKind::Annulus, r_inner, r_outer};
  d.validate();
  return d;
}

void Domain::validate() const {
  if (!std::isfinite(r_inner) || !std::isfinite(r_outer) || r_inner < 0.0 || r_outer <= r_inner)
    throw InvalidArgument("degenerate domain: need r_outer > r_inner >= 0");
  if ((kind == DomainKind::Disk) != (r_inner == 0.0))
    throw InvalidArgument("a disk has r_inner = 0 and an annulus has r_inner > 0");
}

double Domain::area() const {
  return std::numbers::pi * (r_outer * r_outer - r_inner * r_inner);
}

std::string to_string(DomainKind kind) {
  return kind == DomainKind::Disk ? "disk" : "annulus";
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "disk" || name == "Disk") return DomainKind::Disk;
  if (name == "annulus" || name == "Annulus") return DomainKind::Annulus;
  throw InvalidArgument("unknown domain kind '" + name + "'");
}

double Direction::angle(const Grid& grid) const {
  return grid.dtheta * angle_index;
}

Direction Direction::opposite(const Grid& grid) const {
  return Direction{grid.wrap(angle_index + grid.ntheta / 2)};
}

Region Region::full(const Grid& grid) {
  return Region{"full", std::vector<char>(grid.node_count(), 1)};
}

Region Region::cap(const Grid& grid, Direction e) {
  return from_nodes(grid, cap_mask(grid, e), "cap:" + std::to_string(e.angle_index));
}

Region Region::inner_disk(const Grid& grid, double radius) {
  Region region{"inner_disk:" + std::to_string(radius), std::vector<char>(grid.node_count(), 0)};
  for (int n = 0; n < grid.node_count(); ++n)
    region.member[n] = grid.radius(n) < radius ? 1 : 0;
  return region;
}

Region Region::from_nodes(const Grid& grid, const std::vector<int>& nodes, std::string label) {
  Region region{std::move(label), std::vector<char>(grid.node_count(), 0)};
  for (int n : nodes) {
    if (n < 0 || n >= grid.node_count()) throw InvalidArgument("region node out of range");
    region.member[n] = 1;
  }
  return region;
}

std::vector<int> Region::nodes() const {
  std::vector<int> out;
  for (int n = 0; n < static_cast<int>(member.size()); ++n)
    if (member[n]) out.push_back(n);
  return out;
}

int Region::size() const {
  int count = 0;
  for (char c : member) count += c != 0;
  return count;
}

Grid build_grid(const Domain& domain, int nr, int ntheta) {
  domain.validate();
  if (nr < 2) throw InvalidArgument("nr must be at least 2");
  if (ntheta < 8 || ntheta % 4 != 0)
    throw InvalidArgument("ntheta must be >= 8 and divisible by 4");

  Grid g;
  g.domain = domain;
  g.nr = nr;
  g.ntheta = ntheta;
  g.dr = (domain.r_outer - domain.r_inner) / nr;
  g.dtheta = 2.0 * std::numbers::pi / ntheta;
  g.r_nodes.resize(nr);
  for (int i = 0; i < nr; ++i) g.r_nodes[i] = domain.r_inner + (i + 0.5) * g.dr;
  g.theta_nodes.resize(ntheta);
  for (int j = 0; j < ntheta; ++j) g.theta_nodes[j] = j * g.dtheta;
  g.cell_weights.resize(g.node_count());
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < ntheta; ++j) g.cell_weights[g.node(i, j)] = g.r_nodes[i] * g.dr * g.dtheta;
  return g;
}

namespace {

// Face radius between rings i-1 and i (i = 0 is the inner boundary face).
double face_radius(const Grid& g, int i) {
  return g.domain.r_inner + i * g.dr;
}

std::vector<Eigen::Triplet<double>> stiffness_triplets(const Grid& g) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<size_t>(g.node_count()) * 5);
  for (int i = 0; i < g.nr; ++i) {
    const double ri = g.r_nodes[i];
    // Flux coefficients through the inner/outer radial faces and the two
    // angular faces of cell (i, j).
    const double inner = face_radius(g, i) * g.dtheta / g.dr;
    const double outer = face_radius(g, i + 1) * g.dtheta / g.dr;
    const double ang = g.dr / (ri * g.dtheta);
    for (int j = 0; j < g.ntheta; ++j) {
      const int row = g.node(i, j);
      double diag = 2.0 * ang;
      t.emplace_back(row, g.node(i, g.wrap(j + 1)), -ang);
      t.emplace_back(row, g.node(i, g.wrap(j - 1)), -ang);

      if (i + 1 < g.nr) {
        diag += outer;
        t.emplace_back(row, g.node(i + 1, j), -outer);
      } else {
        diag += 2.0 * outer;  // mirrored ghost: u_ghost = -u
      }

      if (i > 0) {
        diag += inner;
        t.emplace_back(row, g.node(i - 1, j), -inner);
      } else if (g.domain.kind == DomainKind::Annulus) {
        diag += 2.0 * inner;
      }  // a disk's first face sits at r = 0 and has zero length
      t.emplace_back(row, row, diag);
    }
  }
  return t;
}

}  // namespace

SparseOperator stiffness(const Grid& grid) {
  auto t = stiffness_triplets(grid);
  SparseMatrix k(grid.node_count(), grid.node_count());
  k.setFromTriplets(t.begin(), t.end());
  k.makeCompressed();
  return SparseOperator{std::move(k), true};
}

SparseOperator laplacian(const Grid& grid) {
  auto t = stiffness_triplets(grid);
  for (auto& e : t) e = Eigen::Triplet<double>(e.row(), e.col(), e.value() / grid.cell_weights[e.row()]);
  SparseMatrix a(grid.node_count(), grid.node_count());
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return SparseOperator{std::move(a), false};
}

std::vector<int> reflect_map(const Grid& grid, Direction e) {
  // theta -> 2 phi + pi - theta
  std::vector<int> p(grid.node_count());
  const int base = 2 * e.angle_index + grid.ntheta / 2;
  for (int i = 0; i < grid.nr; ++i)
    for (int j = 0; j < grid.ntheta; ++j) p[grid.node(i, j)] = grid.node(i, grid.wrap(base - j));
  return p;
}

std::vector<int> rotate_map(const Grid& grid, int shift) {
  std::vector<int> p(grid.node_count());
  for (int i = 0; i < grid.nr; ++i)
    for (int j = 0; j < grid.ntheta; ++j) p[grid.node(i, j)] = grid.node(i, grid.wrap(j + shift));
  return p;
}

std::vector<int> cap_mask(const Grid& grid, Direction e) {
  // cos(theta_j - phi_k) > 0  <=>  (j - k) mod ntheta in (-ntheta/4, ntheta/4)
  const int quarter = grid.ntheta / 4;
  std::vector<int> out;
  for (int i = 0; i < grid.nr; ++i)
    for (int j = 0; j < grid.ntheta; ++j) {
      const int d = grid.wrap(j - e.angle_index);
      if (d < quarter || d > grid.ntheta - quarter) out.push_back(grid.node(i, j));
    }
  return out;
}

double first_laplacian_eigenvalue(const Grid& grid) {
  // The angular mode 0 decouples: a weighted tridiagonal radial problem.
  const int n = grid.nr;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double inner = face_radius(grid, i) / grid.dr;
    const double outer = face_radius(grid, i + 1) / grid.dr;
    k(i, i) += (i + 1 < n) ? outer : 2.0 * outer;
    if (i + 1 < n) k(i, i + 1) = k(i + 1, i) = -outer;
    if (i > 0)
      k(i, i) += inner;
    else if (grid.domain.kind == DomainKind::Annulus)
      k(i, i) += 2.0 * inner;
  }
  Eigen::VectorXd inv_sqrt_m(n);
  for (int i = 0; i < n; ++i) inv_sqrt_m[i] = 1.0 / std::sqrt(grid.r_nodes[i] * grid.dr);
  Eigen::MatrixXd s = inv_sqrt_m.asDiagonal() * k * inv_sqrt_m.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

}  // namespace coopsym
