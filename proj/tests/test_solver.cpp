#include <doctest.h>

#include <numbers>

#include "coopsym/error.hpp"
#include "coopsym/solver.hpp"
#include "coopsym/symmetry.hpp"
#include "support.hpp"

using namespace coopsym;
using testing::unit_disk;

namespace {

// u(0) of the positive radial Lane-Emden p = 3 solution on the unit disk,
// frozen from radial_shoot and cross-checked against the RK4 oracle below.
constexpr double kLaneEmden3Center = 3.57390098193;

double ring_spread(const VectorField& u) {
  const Grid& g = u.grid();
  double worst = 0.0;
  for (int c = 0; c < u.components(); ++c)
    for (int i = 0; i < g.nr; ++i) {
      double lo = u.at(c, g.node(i, 0)), hi = lo;
      for (int j = 0; j < g.ntheta; ++j) {
        lo = std::min(lo, u.at(c, g.node(i, j)));
        hi = std::max(hi, u.at(c, g.node(i, j)));
      }
      worst = std::max(worst, hi - lo);
    }
  return worst;
}

Solution lane_emden_positive(int nr) {
  const Problem p = scalar_lane_emden(3);
  GuessSpec spec;
  spec.kind = GuessKind::RadialBump;
  spec.amplitude = 4.0;
  return newton_solve(p, initial_guess(unit_disk(nr, 2 * nr), 1, spec));
}

}  // namespace

TEST_CASE("shooting matches an independent RK4 oracle") {
  const RadialProfile prof = radial_shoot(scalar_lane_emden(3), Domain::disk(1.0), SignPattern::Positive);
  const double oracle = testing::lane_emden_center_value(3.0);
  CHECK(prof.free_value[0] == doctest::Approx(oracle).epsilon(1e-7));
  CHECK(prof.free_value[0] == doctest::Approx(kLaneEmden3Center).epsilon(1e-9));
  CHECK(prof.boundary_miss() < 1e-8);
  CHECK(prof.sign_changes == 0);
  for (size_t k = 1; k < prof.radii.size(); ++k) CHECK(prof.values[0][k] < prof.values[0][k - 1]);
}

TEST_CASE("shooting the swap-symmetric power system") {
  const RadialProfile prof = radial_shoot(power_system(3, 3), Domain::disk(1.0), SignPattern::Positive);
  CHECK(prof.free_value[0] == doctest::Approx(kLaneEmden3Center).epsilon(1e-8));
  CHECK(prof.free_value[1] == doctest::Approx(prof.free_value[0]).epsilon(1e-12));
  for (size_t k = 0; k < prof.radii.size(); k += 97) CHECK(prof.values[0][k] == doctest::Approx(prof.values[1][k]));
}

TEST_CASE("shooting an asymmetric system on an annulus") {
  const RadialProfile prof = radial_shoot(power_system(3, 5), Domain::annulus(1.0, 2.0), SignPattern::Positive);
  CHECK(prof.boundary_miss() < 1e-8);
  for (int c = 0; c < 2; ++c)
    for (size_t k = 1; k + 1 < prof.radii.size(); ++k) CHECK(prof.values[c][k] > 0.0);
  CHECK(prof.free_value[0] != doctest::Approx(prof.free_value[1]));
}

TEST_CASE("one-node radial profile") {
  const RadialProfile prof = radial_shoot(scalar_lane_emden(3), Domain::disk(1.0), SignPattern::OneNode);
  CHECK(prof.sign_changes == 1);
  CHECK(prof.free_value[0] > kLaneEmden3Center);
  CHECK(prof.boundary_miss() < 1e-8);
}

TEST_CASE("linear zero problem: zero profile and zero solution") {
  const Problem p = linear_constant(Eigen::MatrixXd::Zero(1, 1));
  const RadialProfile prof = radial_shoot(p, Domain::disk(1.0), SignPattern::Positive);
  for (double v : prof.values[0]) CHECK(v == 0.0);

  GuessSpec spec;
  spec.kind = GuessKind::RandomSeeded;
  spec.seed = 4;
  const Solution s = newton_solve(p, initial_guess(unit_disk(8, 16), 1, spec));
  CHECK(s.trivial);
  CHECK(s.field.max_abs() < 1e-12);
}

TEST_CASE("positive Lane-Emden solution against the shooting oracle") {
  const Solution s64 = lane_emden_positive(64);
  CHECK(s64.residual_inf <= std::max(1e-10, s64.residual_floor));
  const double e64 = std::abs(s64.field.max_abs() - kLaneEmden3Center);
  CHECK(e64 / kLaneEmden3Center < 0.01);
  double lo = s64.field.values()[0];
  for (double v : s64.field.values()) lo = std::min(lo, v);
  CHECK(lo > 0.0);

  const Solution s32 = lane_emden_positive(32);
  const double e32 = std::abs(s32.field.max_abs() - kLaneEmden3Center);
  CHECK(e32 / e64 >= 3.0);
}

TEST_CASE("radial guesses stay radial") {
  const Solution s = lane_emden_positive(32);
  CHECK(ring_spread(s.field) <= 1e-9);
}

TEST_CASE("swap-symmetric guesses give u1 = u2") {
  const RadialProfile prof = radial_shoot(scalar_lane_emden(3), Domain::disk(1.0), SignPattern::Positive);
  const auto g = unit_disk(32, 64);
  GuessSpec spec;
  spec.kind = GuessKind::FromRadialProfile;
  spec.profile = prof;
  const Solution s = newton_solve(power_system(3, 3), initial_guess(g, 2, spec));
  double diff = 0.0;
  for (int n = 0; n < g->node_count(); ++n) diff = std::max(diff, std::abs(s.field.at(0, n) - s.field.at(1, n)));
  CHECK(diff <= 1e-8);

  GuessSpec nodal;
  nodal.kind = GuessKind::NodalAngular;
  nodal.amplitude = 3.0;
  const Solution t = newton_solve(power_system(4, 4), initial_guess(g, 2, nodal));
  diff = 0.0;
  for (int n = 0; n < g->node_count(); ++n) diff = std::max(diff, std::abs(t.field.at(0, n) - t.field.at(1, n)));
  CHECK(diff <= 1e-8);
}

TEST_CASE("initial guesses") {
  const auto g = unit_disk(8, 16);
  GuessSpec zero;
  zero.amplitude = 0.0;
  CHECK(initial_guess(g, 2, zero).max_abs() == 0.0);

  GuessSpec nodal;
  nodal.kind = GuessKind::NodalAngular;
  nodal.angle = 0.4;
  const VectorField u = initial_guess(g, 1, nodal);
  for (int i = 0; i < g->nr; ++i) {
    double mean = 0.0;
    for (int j = 0; j < g->ntheta; ++j) mean += u.at(0, g->node(i, j));
    CHECK(std::abs(mean) < 1e-12);
  }

  GuessSpec radial;
  radial.kind = GuessKind::FromRadialProfile;
  radial.profile = radial_shoot(scalar_lane_emden(3), Domain::disk(1.0), SignPattern::Positive);
  CHECK(ring_spread(initial_guess(g, 1, radial)) == 0.0);

  GuessSpec random;
  random.kind = GuessKind::RandomSeeded;
  random.seed = 9;
  CHECK(initial_guess(g, 2, random).values() == initial_guess(g, 2, random).values());

  GuessSpec missing;
  missing.kind = GuessKind::FromRadialProfile;
  CHECK_THROWS_AS(initial_guess(g, 1, missing), InvalidArgument);
}

TEST_CASE("residual and its floor") {
  const auto g = unit_disk(16, 32);
  GuessSpec spec;
  const VectorField u = initial_guess(g, 1, spec);
  const Residual r = residual(scalar_lane_emden(3), u);
  CHECK(r.inf > 0.0);
  CHECK(r.floor > 0.0);
  CHECK(r.floor < 1e-8);
}

TEST_CASE("Newton failure is reported") {
  GuessSpec nodal;
  nodal.kind = GuessKind::NodalAngular;
  nodal.amplitude = 20.0;
  NewtonOptions opts;
  opts.max_iters = 8;
  CHECK_THROWS_AS(newton_solve(scalar_lane_emden(3), initial_guess(unit_disk(16, 32), 1, nodal), opts), SolverError);
}
