#include <cmath>

#include <benchmark/benchmark.h>

#include "pspin/optimizers.hpp"
#include "pspin/parisi.hpp"
#include "pspin/rng.hpp"
#include "pspin/spectral.hpp"

using namespace pspin;

namespace {

Vector sphere_point(int n, std::uint64_t seed) {
  RandomStream rng(seed);
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.normal();
  return x * (std::sqrt(double(n)) / x.norm());
}

Mixture degree(int k) { return Mixture::pure(k); }

}  // namespace

static void BM_Sample(benchmark::State& state) {
  const int k = state.range(0), n = state.range(1);
  for (auto _ : state) benchmark::DoNotOptimize(Hamiltonian::sample(degree(k), n, 1, SpinDomain::Sphere));
}
BENCHMARK(BM_Sample)->Args({2, 1000})->Args({3, 150})->Args({4, 60})->Unit(benchmark::kMillisecond);

static void BM_Energy(benchmark::State& state) {
  const int k = state.range(0), n = state.range(1);
  const auto h = Hamiltonian::sample(degree(k), n, 1, SpinDomain::Sphere);
  const Vector x = sphere_point(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(h.energy(x));
}
BENCHMARK(BM_Energy)->Args({2, 1000})->Args({3, 150})->Args({3, 300})->Args({4, 60});

static void BM_Gradient(benchmark::State& state) {
  const int k = state.range(0), n = state.range(1);
  const auto h = Hamiltonian::sample(degree(k), n, 1, SpinDomain::Sphere);
  const Vector x = sphere_point(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(h.gradient(x));
}
BENCHMARK(BM_Gradient)->Args({2, 1000})->Args({3, 150})->Args({3, 300})->Args({4, 60});

static void BM_Hessian(benchmark::State& state) {
  const int k = state.range(0), n = state.range(1);
  const auto h = Hamiltonian::sample(degree(k), n, 1, SpinDomain::Sphere);
  const Vector x = sphere_point(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(h.hessian(x));
}
BENCHMARK(BM_Hessian)->Args({3, 150})->Args({3, 300})->Args({4, 60})->Unit(benchmark::kMicrosecond);

static void BM_TopEigenpair(benchmark::State& state) {
  const int n = state.range(0);
  const auto h = Hamiltonian::sample(Mixture::pure(2), n, 1, SpinDomain::Sphere);
  const Matrix a = h.projected_hessian(sphere_point(n, 2));
  RandomStream rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(top_eigenpair(a, rng));
}
BENCHMARK(BM_TopEigenpair)->Arg(150)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_HessianAscent(benchmark::State& state) {
  const int n = state.range(0);
  const auto h = Hamiltonian::sample(Mixture::pure(3), n, 1, SpinDomain::Sphere);
  for (auto _ : state) benchmark::DoNotOptimize(hessian_ascent(h, 0.05, 4));
}
BENCHMARK(BM_HessianAscent)->Arg(100)->Arg(150)->Unit(benchmark::kMillisecond);

static void BM_ParisiPde(benchmark::State& state) {
  const Mixture m = Mixture::parse("2:1,4:1");
  const auto g = StepFunction::constant(1.0);
  const PdeGrid grid = state.range(0) ? PdeGrid::defaults(m) : PdeGrid::coarse(m);
  for (auto _ : state) benchmark::DoNotOptimize(solve_parisi_pde(m, g, grid, Terminal::abs()).at_origin());
}
BENCHMARK(BM_ParisiPde)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
