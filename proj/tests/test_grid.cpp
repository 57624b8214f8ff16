#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>
#include <set>

#include "coopsym/error.hpp"
#include "coopsym/grid.hpp"
#include "coopsym/spectral.hpp"
#include "support.hpp"

using namespace coopsym;
using testing::unit_disk;

TEST_CASE("cell centers and angles") {
  const auto g = unit_disk(2, 8);
  CHECK(g->r_nodes == std::vector<double>{0.25, 0.75});
  CHECK(g->dtheta == doctest::Approx(std::numbers::pi / 4));
  CHECK(g->theta_nodes[1] == doctest::Approx(std::numbers::pi / 4));

  const auto a = testing::make_grid(Domain::annulus(1.0, 2.0), 4, 8);
  CHECK(a->r_nodes == std::vector<double>{1.125, 1.375, 1.625, 1.875});
}

TEST_CASE("bad grids are rejected") {
  CHECK_THROWS_AS(build_grid(Domain::disk(1.0), 8, 10), InvalidArgument);
  CHECK_THROWS_AS(build_grid(Domain::disk(1.0), 1, 8), InvalidArgument);
  CHECK_THROWS_AS(build_grid(Domain::disk(-1.0), 8, 8), InvalidArgument);
  CHECK_THROWS_AS(build_grid(Domain::annulus(2.0, 1.0), 8, 8), InvalidArgument);
}

TEST_CASE("cell weights sum to the area") {
  const auto g = unit_disk(64, 128);
  double s = 0.0;
  for (double w : g->cell_weights) s += w;
  CHECK(std::abs(s - std::numbers::pi) / std::numbers::pi < 1e-3);

  const auto a = testing::make_grid(Domain::annulus(1.0, 2.0), 16, 32);
  s = 0.0;
  for (double w : a->cell_weights) s += w;
  CHECK(s == doctest::Approx(3.0 * std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("laplacian of a constant vanishes away from the boundary") {
  const auto g = testing::make_grid(Domain::annulus(100.0, 101.0), 8, 16);
  const SparseOperator lap = laplacian(*g);
  Eigen::VectorXd one = Eigen::VectorXd::Ones(g->node_count());
  const Eigen::VectorXd out = lap.matrix * one;
  for (int i = 1; i + 1 < g->nr; ++i)
    for (int j = 0; j < g->ntheta; ++j) CHECK(std::abs(out[g->node(i, j)]) < 1e-9);
}

TEST_CASE("stiffness is symmetric and equals W times the laplacian") {
  const auto g = unit_disk(6, 12);
  const Eigen::MatrixXd k = testing::dense(stiffness(*g));
  const Eigen::MatrixXd l = testing::dense(laplacian(*g));
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (int n = 0; n < g->node_count(); ++n)
    CHECK((k.row(n) - g->cell_weights[n] * l.row(n)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("first Dirichlet eigenvalue against Bessel zeros") {
  const double j01 = testing::bessel_zero_sq(0);
  const double j11 = testing::bessel_zero_sq(1);
  CHECK(j01 == doctest::Approx(5.78319).epsilon(1e-5));
  CHECK(j11 == doctest::Approx(14.68197).epsilon(1e-5));

  const auto g32 = unit_disk(32, 64);
  const auto g64 = unit_disk(64, 128);
  const double e32 = std::abs(first_laplacian_eigenvalue(*g32) - j01);
  const double e64 = std::abs(first_laplacian_eigenvalue(*g64) - j01);
  CHECK(e64 / j01 < 0.01);
  CHECK(e32 / e64 >= 3.0);

  MatrixField zero(g64->node_count(), 1);
  const auto op = LinearizedOperator::from_potential(g64, zero);
  const double half = symmetric_spectrum(op, Region::cap(*g64, Direction{0}), 1).eigenvalues[0];
  CHECK(std::abs(half - j11) / j11 < 0.015);
}

TEST_CASE("reflection across the line normal to +x") {
  const auto g = unit_disk(3, 16);
  const auto p = reflect_map(*g, Direction{0});
  for (int n = 0; n < g->node_count(); ++n) {
    const int i = g->ring_of(n), j = g->angle_of(n);
    const int image = p[n];
    CHECK(g->ring_of(image) == i);
    double want = std::fmod(std::numbers::pi - g->theta_nodes[j] + 2 * std::numbers::pi, 2 * std::numbers::pi);
    CHECK(g->theta_nodes[g->angle_of(image)] == doctest::Approx(want));
  }
}

TEST_CASE("reflections are involutions and fix radial fields") {
  const auto g = unit_disk(5, 24);
  VectorField radial(g, 2);
  for (int c = 0; c < 2; ++c)
    for (int n = 0; n < g->node_count(); ++n) radial.at(c, n) = (c + 1) * std::cos(g->radius(n));
  for (int k = 0; k < g->ntheta; ++k) {
    const auto p = reflect_map(*g, Direction{k});
    for (int n = 0; n < g->node_count(); ++n) CHECK(p[p[n]] == n);
    CHECK(radial.permuted(p).values() == radial.values());
  }
}

TEST_CASE("cap masks partition the off-plane nodes") {
  const auto g = unit_disk(4, 16);
  for (int k = 0; k < g->ntheta; ++k) {
    const Direction e{k};
    const auto p = reflect_map(*g, e);
    const auto mask = cap_mask(*g, e);
    std::set<int> cap(mask.begin(), mask.end()), image;
    for (int n : mask) image.insert(p[n]);
    const auto opp = cap_mask(*g, e.opposite(*g));
    CHECK(image == std::set<int>(opp.begin(), opp.end()));
    for (int n = 0; n < g->node_count(); ++n) {
      const double x_dot_e = std::cos(g->theta_nodes[g->angle_of(n)] - e.angle(*g));
      const bool off_plane = std::abs(x_dot_e) > 1e-12;
      CHECK(off_plane == (cap.count(n) + image.count(n) == 1));
    }
  }
}

TEST_CASE("cap size on the eight-angle grid") {
  // Angles 7 pi/4, 0, pi/4 lie strictly inside the cap; pi/2 and 3 pi/2 sit on T(e).
  for (int nr : {2, 5}) {
    const auto g = unit_disk(nr, 8);
    CHECK(cap_mask(*g, Direction{0}).size() == static_cast<size_t>(3 * nr));
  }
}

TEST_CASE("rotation map moves angle indices") {
  const auto g = unit_disk(3, 8);
  const auto p = rotate_map(*g, 3);
  for (int n = 0; n < g->node_count(); ++n) {
    CHECK(g->ring_of(p[n]) == g->ring_of(n));
    CHECK(g->angle_of(p[n]) == g->wrap(g->angle_of(n) + 3));
  }
}

TEST_CASE("restricted laplacian is self-adjoint in the weighted product") {
  const auto g = unit_disk(6, 16);
  const Eigen::MatrixXd l = testing::dense(laplacian(*g));
  std::mt19937_64 rng(3);
  for (int k : {0, 3, 5}) {
    const Region cap = Region::cap(*g, Direction{k});
    VectorField u = testing::random_field(g, 1, rng).restricted(cap);
    VectorField v = testing::random_field(g, 1, rng).restricted(cap);
    const Eigen::Map<const Eigen::VectorXd> uu(u.values().data(), g->node_count());
    const Eigen::Map<const Eigen::VectorXd> vv(v.values().data(), g->node_count());
    Eigen::VectorXd lu = l * uu, lv = l * vv;
    double a = 0.0, b = 0.0;
    for (int n = 0; n < g->node_count(); ++n) {
      if (!cap.contains(n)) continue;
      a += g->cell_weights[n] * lu[n] * vv[n];
      b += g->cell_weights[n] * uu[n] * lv[n];
    }
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("odd extension doubles the cap quadratic form") {
  const auto g = unit_disk(8, 32);
  std::mt19937_64 rng(11);
  MatrixField c(g->node_count(), 2);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  // A reflection-invariant potential, as B^{e,s} is.
  const Direction e{5};
  const auto p = reflect_map(*g, e);
  for (int n = 0; n < g->node_count(); ++n) {
    if (p[n] < n) continue;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) c(n, i, j) = c(p[n], i, j) = uni(rng);
  }
  const auto op = LinearizedOperator::from_potential(g, c);
  const Region cap = Region::cap(*g, e);
  const VectorField phi = testing::random_field(g, 2, rng).restricted(cap);
  const VectorField odd = phi - phi.permuted(p);
  const double qc = quadratic_form(op, phi, cap);
  const double qf = quadratic_form(op, odd, Region::full(*g));
  CHECK(std::abs(qf - 2 * qc) <= 1e-10 * std::max(1.0, std::abs(qc)));
}
