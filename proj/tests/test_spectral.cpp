#include <doctest.h>

#include <algorithm>
#include <random>

#include <Eigen/Eigenvalues>

#include "coopsym/coupling.hpp"
#include "coopsym/error.hpp"
#include "coopsym/spectral.hpp"
#include "support.hpp"

using namespace coopsym;
using testing::unit_disk;

namespace {

MatrixField random_potential(int nodes, int m, std::mt19937_64& rng, bool cooperative, double scale = 3.0) {
  std::uniform_real_distribution<double> uni(-scale, scale), neg(-scale, 0.0);
  MatrixField d(nodes, m);
  for (int n = 0; n < nodes; ++n)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) d(n, i, j) = (cooperative && i != j) ? neg(rng) : uni(rng);
  return d;
}

MatrixField constant_potential(int nodes, const Eigen::MatrixXd& a) {
  MatrixField d(nodes, static_cast<int>(a.rows()));
  for (int n = 0; n < nodes; ++n)
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) d(n, i, j) = a(i, j);
  return d;
}

/// Dense generalized-symmetric oracle: eigenvalues of -Delta_h + C on a region.
Eigen::VectorXd dense_symmetric(const Grid& grid, const MatrixField& d, const Region& region) {
  const Eigen::MatrixXd a = testing::dense_operator(grid, d.symmetrized(), region);
  const std::vector<int> nodes = region.nodes();
  const int s = static_cast<int>(nodes.size());
  Eigen::VectorXd w(a.rows());
  for (int c = 0; c < d.m; ++c)
    for (int p = 0; p < s; ++p) w[c * s + p] = grid.cell_weights[nodes[p]];
  // W^{1/2} A W^{-1/2} is symmetric.
  const Eigen::VectorXd sw = w.cwiseSqrt();
  Eigen::MatrixXd sym = sw.asDiagonal() * a * sw.cwiseInverse().asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues();
}

Solution lane_emden(const GridPtr& g, GuessKind kind, double amplitude) {
  GuessSpec spec;
  spec.kind = kind;
  spec.amplitude = amplitude;
  return newton_solve(scalar_lane_emden(3), initial_guess(g, 1, spec));
}

Solution doubled(const Solution& z) {
  VectorField zz(z.field.grid_ptr(), 2);
  for (int n = 0; n < zz.node_count(); ++n) zz.at(0, n) = zz.at(1, n) = z.field.at(0, n);
  return newton_solve(power_system(3, 3), zz);
}

}  // namespace

TEST_CASE("quadratic form basics") {
  const auto g = unit_disk(32, 64);
  MatrixField zero(g->node_count(), 1);
  const auto op = LinearizedOperator::from_potential(g, zero);
  const Region full = Region::full(*g);
  CHECK(quadratic_form(op, VectorField(g, 1), full) == 0.0);

  const SymmetricSpectrum sp = symmetric_spectrum(op, full, 1);
  const VectorField& psi = sp.eigenfields[0];
  const double norm2 = psi.weighted_norm() * psi.weighted_norm();
  CHECK(quadratic_form(op, psi, full) == doctest::Approx(sp.eigenvalues[0] * norm2).epsilon(1e-10));
  CHECK(sp.eigenvalues[0] == doctest::Approx(testing::bessel_zero_sq(0)).epsilon(0.01));

  VectorField outside(g, 1);
  outside.at(0, 0) = 1.0;
  CHECK_THROWS_AS(quadratic_form(op, outside, Region::cap(*g, Direction{g->ntheta / 2})), InvalidArgument);
}

TEST_CASE("quadratic form only sees the symmetric part") {
  const auto g = unit_disk(6, 12);
  std::mt19937_64 rng(101);
  for (int t = 0; t < 100; ++t) {
    const int m = 1 + t % 3;
    const MatrixField d = random_potential(g->node_count(), m, rng, false);
    const VectorField psi = testing::random_field(g, m, rng);
    const Region full = Region::full(*g);
    const double qd = quadratic_form(LinearizedOperator::from_potential(g, d), psi, full);
    const double qc = quadratic_form(LinearizedOperator::from_potential(g, d.symmetrized()), psi, full);
    CHECK(std::abs(qd - qc) <= 1e-12 * std::max(1.0, std::abs(qd)));
  }
}

TEST_CASE("constant shift moves the spectrum") {
  const auto g = unit_disk(12, 24);
  const Region full = Region::full(*g);
  const auto base = symmetric_spectrum(LinearizedOperator::from_potential(g, MatrixField(g->node_count(), 1)), full, 4);
  const auto shifted = symmetric_spectrum(
      LinearizedOperator::from_potential(g, constant_potential(g->node_count(), Eigen::MatrixXd::Constant(1, 1, -2.5))),
      full, 4);
  for (int k = 0; k < 4; ++k) CHECK(shifted.eigenvalues[k] == doctest::Approx(base.eigenvalues[k] - 2.5).epsilon(1e-10));
}

TEST_CASE("eigenvalues against a dense oracle on a tiny grid") {
  const auto g = unit_disk(3, 8);
  std::mt19937_64 rng(7);
  const MatrixField d = random_potential(g->node_count(), 2, rng, false);
  const auto op = LinearizedOperator::from_potential(g, d);
  for (const Region& region : {Region::full(*g), Region::cap(*g, Direction{1})}) {
    const Eigen::VectorXd oracle = dense_symmetric(*g, d, region);
    EigenOptions iterative;
    iterative.dense_threshold = 0;
    for (const EigenOptions& opts : {EigenOptions{}, iterative}) {
      const SymmetricSpectrum sp = symmetric_spectrum(op, region, 4, opts);
      CHECK(sp.dense == (opts.dense_threshold > 0));
      for (int k = 0; k < 4; ++k) CHECK(std::abs(sp.eigenvalues[k] - oracle[k]) <= 1e-10 * std::max(1.0, std::abs(oracle[k])));
    }
  }
}

TEST_CASE("Morse index against the dense oracle") {
  const auto g = unit_disk(3, 8);
  std::mt19937_64 rng(19);
  for (int t = 0; t < 10; ++t) {
    const MatrixField d = random_potential(g->node_count(), 2, rng, false, 60.0);
    const auto op = LinearizedOperator::from_potential(g, d);
    const Region full = Region::full(*g);
    const Eigen::VectorXd oracle = dense_symmetric(*g, d, full);
    const double tol = default_tol_eig(*g);
    const MorseResult mr = morse_index(op, full, tol);
    const int want = static_cast<int>((oracle.array() < -tol).count());
    if (want < 12) {
      CHECK_FALSE(mr.inconclusive);
      CHECK(mr.index == want);
    }
    REQUIRE(mr.inertia_index.has_value());
    CHECK(*mr.inertia_index == want);
  }
}

TEST_CASE("Morse index of the zero solution") {
  const auto g = unit_disk(8, 16);
  Solution zero{VectorField(g, 2), power_system(3, 3)};
  const MorseResult mr = morse_index(zero, default_tol_eig(*g));
  CHECK(mr.index == 0);
  CHECK_FALSE(mr.inconclusive);
}

TEST_CASE("scalar and doubled system share Morse index and spectrum") {
  const auto g = unit_disk(24, 48);
  const Solution z = lane_emden(g, GuessKind::RadialBump, 4.0);
  const Solution zz = doubled(z);
  const double tol = default_tol_eig(*g);
  const MorseResult ms = morse_index(z, tol), mz = morse_index(zz, tol);
  CHECK(ms.index == 1);
  CHECK(mz.index == ms.index);
  CHECK(mz.inconclusive == ms.inconclusive);

  // Even/odd splitting: phi1 = +-phi2 gives -Delta -+ 3 z^2.
  const auto minus = LinearizedOperator::at_solution(z);
  const auto plus = LinearizedOperator::from_potential(g, minus.potential.negated());
  const Region full = Region::full(*g);
  std::vector<double> merged = symmetric_spectrum(minus, full, 6).eigenvalues;
  for (double v : symmetric_spectrum(plus, full, 6).eigenvalues) merged.push_back(v);
  std::sort(merged.begin(), merged.end());
  const auto sys = symmetric_spectrum(LinearizedOperator::at_solution(zz), full, 6).eigenvalues;
  for (int k = 0; k < 6; ++k) CHECK(std::abs(sys[k] - merged[k]) <= 1e-6 * std::max(1.0, std::abs(merged[k])));
}

TEST_CASE("principal eigenvalue: symmetric and decoupled cases") {
  const auto g = unit_disk(12, 24);
  const Region full = Region::full(*g);
  std::mt19937_64 rng(31);
  MatrixField d = random_potential(g->node_count(), 2, rng, true).symmetrized();
  const auto op = LinearizedOperator::from_potential(g, d);
  const double ls = symmetric_spectrum(op, full, 1).eigenvalues[0];
  const PrincipalPair pp = principal_eigenvalue(op, full);
  CHECK(std::abs(pp.eigenvalue - ls) <= 1e-8 * std::max(1.0, std::abs(ls)));
  CHECK(pp.lower_bound <= pp.eigenvalue + 1e-8);
  CHECK(pp.upper_bound >= pp.eigenvalue - 1e-8);
  for (double v : pp.field.values()) CHECK(v >= 0.0);

  Eigen::MatrixXd diag(2, 2);
  diag << 1.5, 0, 0, -0.75;
  const double l1 = first_laplacian_eigenvalue(*g);
  const PrincipalPair dd = principal_eigenvalue(LinearizedOperator::from_potential(g, constant_potential(g->node_count(), diag)), full);
  CHECK(dd.eigenvalue == doctest::Approx(std::min(l1 + 1.5, l1 - 0.75)).epsilon(1e-10));
}

TEST_CASE("principal eigenvalue of a constant nonsymmetric coupling") {
  const auto g = unit_disk(3, 8);
  Eigen::MatrixXd a(2, 2);
  a << 1.0, -3.0, -0.5, 2.0;
  const MatrixField d = constant_potential(g->node_count(), a);
  const Region full = Region::full(*g);
  const Eigen::MatrixXd dense = testing::dense_operator(*g, d, full);
  Eigen::EigenSolver<Eigen::MatrixXd> es(dense);
  // Smallest real part whose eigenvector has one sign.
  double oracle = std::numeric_limits<double>::infinity();
  for (int k = 0; k < dense.rows(); ++k) {
    const Eigen::VectorXd v = es.eigenvectors().col(k).real();
    if (std::abs(es.eigenvalues()[k].imag()) > 1e-12) continue;
    if ((v.array() > 0).all() || (v.array() < 0).all()) oracle = std::min(oracle, es.eigenvalues()[k].real());
  }
  double smallest = es.eigenvalues().real().minCoeff();
  CHECK(oracle == doctest::Approx(smallest));
  const PrincipalPair pp = principal_eigenvalue(LinearizedOperator::from_potential(g, d), full);
  CHECK(std::abs(pp.eigenvalue - oracle) <= 1e-8);
  const double ls = symmetric_spectrum(LinearizedOperator::from_potential(g, d), full, 1).eigenvalues[0];
  CHECK(pp.eigenvalue > ls + 1e-8);  // strict: d12 != d21
}

TEST_CASE("principal eigenvalue dominates the symmetric one") {
  std::mt19937_64 rng(43);
  const auto g = unit_disk(6, 12);
  for (int t = 0; t < 50; ++t) {
    const int m = 1 + t % 3;
    const MatrixField d = random_potential(g->node_count(), m, rng, true);
    const auto op = LinearizedOperator::from_potential(g, d);
    const Region region = t % 2 ? Region::full(*g) : Region::cap(*g, Direction{t % g->ntheta});
    const double ls = symmetric_spectrum(op, region, 1).eigenvalues[0];
    CHECK(principal_eigenvalue(op, region).eigenvalue >= ls - 1e-8);
  }
}

TEST_CASE("non-cooperative potentials are refused") {
  const auto g = unit_disk(4, 8);
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, 0, 0;
  CHECK_THROWS_AS(principal_eigenvalue(LinearizedOperator::from_potential(g, constant_potential(g->node_count(), a)),
                                       Region::full(*g)),
                  EigenError);
}

TEST_CASE("larger potentials raise the first eigenvalue") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> bump(0.0, 1.0);
  const auto g = unit_disk(8, 16);
  for (int t = 0; t < 20; ++t) {
    const MatrixField c0 = random_potential(g->node_count(), 2, rng, true).symmetrized();
    MatrixField c1 = c0;
    for (int n = 0; n < g->node_count(); ++n) {
      const double off = bump(rng);
      c1(n, 0, 0) += bump(rng);
      c1(n, 1, 1) += bump(rng);
      c1(n, 0, 1) += off;
      c1(n, 1, 0) += off;
    }
    const Region full = Region::full(*g);
    const double l0 = symmetric_spectrum(LinearizedOperator::from_potential(g, c0), full, 1).eigenvalues[0];
    const double l1 = symmetric_spectrum(LinearizedOperator::from_potential(g, c1), full, 1).eigenvalues[0];
    CHECK(l1 >= l0 - 1e-10);
  }
}

TEST_CASE("Rayleigh quotient of the first eigenfield") {
  std::mt19937_64 rng(61);
  const auto g = unit_disk(10, 20);
  const MatrixField d = random_potential(g->node_count(), 2, rng, true);
  const auto op = LinearizedOperator::from_potential(g, d);
  const Region full = Region::full(*g);
  const SymmetricSpectrum sp = symmetric_spectrum(op, full, 1);
  const VectorField& w = sp.eigenfields[0];
  CHECK(quadratic_form(op, w, full) / std::pow(w.weighted_norm(), 2) == doctest::Approx(sp.eigenvalues[0]).epsilon(1e-8));
  for (int t = 0; t < 50; ++t) {
    const VectorField psi = testing::random_field(g, 2, rng);
    CHECK(quadratic_form(op, psi, full) / std::pow(psi.weighted_norm(), 2) >= sp.eigenvalues[0] - 1e-10);
  }
}

TEST_CASE("first eigenfield of a fully coupled operator has one sign") {
  std::mt19937_64 rng(67);
  const auto g = unit_disk(10, 20);
  for (int t = 0; t < 5; ++t) {
    MatrixField d = random_potential(g->node_count(), 3, rng, true);
    for (int n = 0; n < g->node_count(); ++n)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          if (i != j) d(n, i, j) = std::min(d(n, i, j), -0.1);
    const auto op = LinearizedOperator::from_potential(g, d);
    const VectorField& phi = symmetric_spectrum(op, Region::full(*g), 1).eigenfields[0];
    const auto [lo, hi] = std::minmax_element(phi.values().begin(), phi.values().end());
    CHECK(*lo * *hi > 0.0);
  }
}

TEST_CASE("decoupled equal blocks: positive and negative parts are eigenfields") {
  const auto g = unit_disk(8, 16);
  const Region full = Region::full(*g);
  const auto scalar = LinearizedOperator::from_potential(g, constant_potential(g->node_count(), Eigen::MatrixXd::Ones(1, 1)));
  const SymmetricSpectrum s1 = symmetric_spectrum(scalar, full, 1);
  const auto op = LinearizedOperator::from_potential(g, constant_potential(g->node_count(), Eigen::MatrixXd::Identity(2, 2)));
  const SymmetricSpectrum sp = symmetric_spectrum(op, full, 3);
  CHECK(sp.eigenvalues[0] == doctest::Approx(sp.eigenvalues[1]).epsilon(1e-10));
  CHECK(sp.eigenvalues[2] > sp.eigenvalues[1] + 1.0);

  // W = (phi, -phi) changes sign; W+ = (phi, 0) and W- = (0, phi).
  const VectorField& phi = s1.eigenfields[0];
  VectorField w(g, 2), wp(g, 2), wm(g, 2);
  for (int n = 0; n < g->node_count(); ++n) {
    w.at(0, n) = phi.at(0, n);
    w.at(1, n) = -phi.at(0, n);
    wp.at(0, n) = std::max(w.at(0, n), 0.0);
    wm.at(1, n) = std::max(-w.at(1, n), 0.0);
  }
  for (const VectorField* f : {&w, &wp, &wm})
    CHECK(quadratic_form(op, *f, full) / std::pow(f->weighted_norm(), 2) == doctest::Approx(sp.eigenvalues[0]).epsilon(1e-9));
}

TEST_CASE("maximum principle probe") {
  const auto g = unit_disk(16, 32);
  const Region full = Region::full(*g);
  const ProbeReport zero = maximum_principle_probe(LinearizedOperator::from_potential(g, MatrixField(g->node_count(), 2)), full, 20);
  CHECK(zero.passed == zero.trials);
  CHECK(zero.consistent);
  CHECK(zero.lambda1_sym > 0.0);
}

TEST_CASE("shrinking the region restores the maximum principle") {
  // Lane-Emden p = 3 linearization: lambda_1^s on r < rho turns positive
  // between rho = 0.45 and rho = 0.40 at nr = 32 and nr = 64 alike.
  const auto g = unit_disk(32, 64);
  const auto op = LinearizedOperator::at_solution(lane_emden(g, GuessKind::RadialBump, 4.0));
  const double tol = default_tol_eig(*g);
  double previous = -std::numeric_limits<double>::infinity();
  std::optional<double> transition;
  for (double rho = 1.0; rho > 0.12; rho -= 0.05) {
    const Region region = Region::inner_disk(*g, rho);
    const ProbeReport rep = maximum_principle_probe(op, region, 100, 5);
    CHECK(rep.consistent);
    CHECK(rep.lambda1_sym >= previous - 1e-10);
    previous = rep.lambda1_sym;
    if (rep.lambda1_sym > tol) {
      CHECK(rep.passed == rep.trials);
      if (!transition) transition = rho;
    }
  }
  REQUIRE(transition.has_value());
  CHECK(*transition < 0.45);
  CHECK(*transition > 0.35);
}

TEST_CASE("spectral report of the positive Lane-Emden solution") {
  const auto g = unit_disk(24, 48);
  const SpectralReport rep = spectral_report(lane_emden(g, GuessKind::RadialBump, 4.0));
  CHECK(rep.morse.index == 1);
  REQUIRE(rep.principal_eigenvalue.has_value());
  CHECK(*rep.principal_eigenvalue == doctest::Approx(rep.eigenvalues[0]).epsilon(1e-8));
  CHECK(rep.eigenvalues[1] == doctest::Approx(rep.eigenvalues[2]).epsilon(1e-8));  // rotation pair
}
