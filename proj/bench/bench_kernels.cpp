// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "coopsym/kernels.hpp"
#include "coopsym/problems.hpp"
#include "coopsym/solver.hpp"

namespace {

using namespace coopsym;

struct Fixture {
  GridPtr grid;
  Problem problem = power_system(3.0, 3.0);
  VectorField u, v;
  SparseOperator lap;

  explicit Fixture(int nr) {
    grid = std::make_shared<const Grid>(build_grid(Domain::disk(1.0), nr, 2 * nr));
    GuessSpec spec;
    spec.kind = GuessKind::RandomSeeded;
    spec.seed = 7;
    u = initial_guess(grid, 2, spec);
    v = u.permuted(reflect_map(*grid, Direction{3}));
    lap = laplacian(*grid);
  }
};

const Fixture& fixture(int nr) {
  static Fixture f32(32), f64(64), f128(128);
  return nr == 32 ? f32 : nr == 64 ? f64 : f128;
}

template <bool Parallel>
void BM_Nonlinearity(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto out = Parallel ? kernels::parallel::nonlinearity(f.problem, f.u) : kernels::serial::nonlinearity(f.problem, f.u);
    benchmark::DoNotOptimize(out.values().data());
  }
}

template <bool Parallel>
void BM_Jacobian(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto out = Parallel ? kernels::parallel::jacobian(f.problem, f.u) : kernels::serial::jacobian(f.problem, f.u);
    benchmark::DoNotOptimize(out.values.data());
  }
}

template <bool Parallel>
void BM_MeanValue(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  const auto rule = kernels::gauss_legendre(8);
  for (auto _ : state) {
    auto out = Parallel ? kernels::parallel::mean_value_coefficients(f.problem, f.u, f.v, rule)
                        : kernels::serial::mean_value_coefficients(f.problem, f.u, f.v, rule);
    benchmark::DoNotOptimize(out.values.data());
  }
}

template <bool Parallel>
void BM_Apply(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto out = Parallel ? kernels::parallel::apply(f.lap, f.u) : kernels::serial::apply(f.lap, f.u);
    benchmark::DoNotOptimize(out.values().data());
  }
}

}  // namespace

BENCHMARK(BM_Nonlinearity<false>)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(BM_Nonlinearity<true>)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(BM_Jacobian<false>)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(BM_Jacobian<true>)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(BM_MeanValue<false>)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(BM_MeanValue<true>)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(BM_Apply<false>)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(BM_Apply<true>)->Arg(32)->Arg(64)->Arg(128);

BENCHMARK_MAIN();
