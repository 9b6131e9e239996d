// Microbenchmarks for the hot path: sector matvec, ground-state solves and
// full Fisher-information points across sizes. Run via the stark_bench
// target; sizes stay small enough for a laptop.

#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "stark/basis.hpp"
#include "stark/eigensolve.hpp"
#include "stark/hamiltonian.hpp"
#include "stark/metrology.hpp"

using namespace stark;

namespace {

ProbeParams half_filled(int L, double eta) {
  return ProbeParams{.L = L, .N = L / 2, .eta = eta, .J = 1.0, .h = 0.3};
}

void bench_matvec(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const SectorOperator op = build_operator(half_filled(L, 1.0));
  Eigen::VectorXd v = Eigen::VectorXd::Random(static_cast<long>(op.dim()));
  Eigen::VectorXd out(v.size());
  for (auto _ : state) {
    op.apply(v, out);
    benchmark::DoNotOptimize(out.data());
    v.swap(out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(op.dim()));
}

void bench_ground_state(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const ProbeParams params = half_filled(L, 1.0);
  for (auto _ : state) {
    ProbeWorkspace ws(params);
    benchmark::DoNotOptimize(ws.ground(params.h).energy0);
  }
}

void bench_qfi_point(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const ProbeParams params = half_filled(L, 1.0);
  for (auto _ : state) {
    ProbeWorkspace ws(params);
    benchmark::DoNotOptimize(ws.qfi_point(params.h).qfi);
  }
}

void bench_field_scan(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const ProbeParams params = half_filled(L, 0.0);
  for (auto _ : state) {
    ProbeWorkspace ws(params);
    double acc = 0;
    for (double h : {0.05, 0.1, 0.2, 0.4, 0.8}) acc += ws.qfi_point(h).qfi;
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 5);
}

} // namespace

BENCHMARK(bench_matvec)->Arg(12)->Arg(16)->Arg(18);
BENCHMARK(bench_ground_state)->Arg(8)->Arg(12)->Arg(14);
BENCHMARK(bench_qfi_point)->Arg(8)->Arg(12)->Arg(14);
BENCHMARK(bench_field_scan)->Arg(10)->Arg(12);

BENCHMARK_MAIN();
