#include <benchmark/benchmark.h>

#include "hkb/caloric.hpp"
#include "hkb/kernel.hpp"
#include "hkb/norms.hpp"

using namespace hkb;

namespace {

WalkSpec lazy_walk(const RootSystemData& rs) {
  WalkSpec w;
  w.coeffs[LatticePoint{}] = Rational(1, 10);
  for (int i = 0; i < rs.rank; ++i) {
    LatticePoint l{};
    l[i] = 1;
    w.coeffs[l] = Rational(9, 10 * rs.rank);
  }
  return w;
}

Family family_of(int64_t rank) { return rank == 1 ? Family::A1 : Family::A2; }

void BM_StructureTable(benchmark::State& state) {
  auto rs = build_root_system(family_of(state.range(0)));
  auto q = uniform_qparams(rs, 2);
  auto w = lazy_walk(rs);
  for (auto _ : state) {
    auto t = prepare_table(rs, q, w);
    benchmark::DoNotOptimize(t);
  }
}
BENCHMARK(BM_StructureTable)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_HeatRecursive(benchmark::State& state) {
  auto rs = build_root_system(family_of(state.range(0)));
  auto q = uniform_qparams(rs, 2);
  auto w = lazy_walk(rs);
  auto table = prepare_table(rs, q, w);
  const int n = static_cast<int>(state.range(1));
  for (auto _ : state) {
    auto k = heat_recursive(table, w, n);
    benchmark::DoNotOptimize(k);
  }
}
BENCHMARK(BM_HeatRecursive)->Args({1, 400})->Args({1, 1600})->Args({2, 100})->Args({2, 200})->Unit(benchmark::kMillisecond);

void BM_HeatSpectral(benchmark::State& state) {
  auto rs = build_root_system(family_of(state.range(0)));
  auto q = uniform_qparams(rs, 2);
  auto km = build_kappa(rs, q, lazy_walk(rs));
  auto grid = build_grid(rs, q, rs.rank == 1 ? 64 : 32);
  for (auto _ : state) {
    auto k = heat_spectral(km, grid, 40);
    benchmark::DoNotOptimize(k);
  }
}
BENCHMARK(BM_HeatSpectral)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_LpNorm(benchmark::State& state) {
  auto rs = build_root_system(Family::A2);
  auto q = uniform_qparams(rs, 2);
  auto w = lazy_walk(rs);
  auto table = prepare_table(rs, q, w);
  auto k = heat_recursive(table, w, 100);
  VolumeTable vt(rs, q);
  for (auto _ : state) benchmark::DoNotOptimize(log_lp_norm(k, vt, 1.5));
}
BENCHMARK(BM_LpNorm)->Unit(benchmark::kMicrosecond);

void BM_GroundStateNorm(benchmark::State& state) {
  auto rs = build_root_system(family_of(state.range(0)));
  auto q = uniform_qparams(rs, 2);
  for (auto _ : state) {
    auto g = ground_state_norm(rs, q, 1.5);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_GroundStateNorm)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
