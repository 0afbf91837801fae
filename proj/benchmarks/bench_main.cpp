#include <benchmark/benchmark.h>

#include "ddh/bounds.hpp"
#include "ddh/continuation.hpp"

namespace {

using namespace ddh;

/// Strip of length 2 with linear boundary data; nx grows with the benchmark argument.
struct Instance {
  Grid grid;
  Coefficients coeffs;
};

Instance strip(int nx) {
  Grid grid(DomainSpec{2.0, 0.05, nx, 4});
  Coefficients c = zero_coefficients(grid);
  c.a_u = lift_boundary(grid, trace_of(grid, [](double x, double) { return x / 2.0; }));
  c.a_n = lift_boundary(grid, trace_of(grid, [](double x, double) { return 1.0 + x / 2.0; }));
  c.a_p = c.a_n;
  return {std::move(grid), std::move(c)};
}

void BM_Residual(benchmark::State& state) {
  const Instance in = strip(static_cast<int>(state.range(0)));
  const BlockState h = solve_lambda0(in.grid, in.coeffs);
  for (auto _ : state) benchmark::DoNotOptimize(residual(in.grid, in.coeffs, h, 0.5));
}
BENCHMARK(BM_Residual)->Arg(64)->Arg(256)->Arg(1024);

void BM_JacobianAssemble(benchmark::State& state) {
  const Instance in = strip(static_cast<int>(state.range(0)));
  const BlockState h = solve_lambda0(in.grid, in.coeffs);
  for (auto _ : state) benchmark::DoNotOptimize(jacobian_assemble(in.grid, in.coeffs, h, 0.5));
}
BENCHMARK(BM_JacobianAssemble)->Arg(64)->Arg(256)->Arg(1024);

void BM_DirectSolve(benchmark::State& state) {
  const Instance in = strip(static_cast<int>(state.range(0)));
  const BlockState h = solve_lambda0(in.grid, in.coeffs);
  const DualResidual g = f_lambda(in.grid, in.coeffs, h);
  for (auto _ : state) {
    const BlockOperator op = jacobian_assemble(in.grid, in.coeffs, h, 0.5);
    benchmark::DoNotOptimize(solve_direct(in.grid, op, g));
  }
}
BENCHMARK(BM_DirectSolve)->Arg(64)->Arg(256)->Arg(1024);

void BM_ContractionSolve(benchmark::State& state) {
  const Instance in = strip(static_cast<int>(state.range(0)));
  const BlockState h = solve_lambda0(in.grid, in.coeffs);
  const DualResidual g = f_lambda(in.grid, in.coeffs, h);
  for (auto _ : state) benchmark::DoNotOptimize(solve_contraction(in.grid, in.coeffs, h, 0.5, g, 1e-12, 500));
}
BENCHMARK(BM_ContractionSolve)->Arg(64)->Arg(256)->Arg(1024);

void BM_Trace(benchmark::State& state) {
  const Instance in = strip(static_cast<int>(state.range(0)));
  TraceConfig cfg;
  cfg.steps = 10;
  for (auto _ : state) benchmark::DoNotOptimize(trace_curve(in.grid, in.coeffs, cfg));
}
BENCHMARK(BM_Trace)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Audit(benchmark::State& state) {
  const Instance in = strip(64);
  const BlockState h0 = curve_start(in.grid, in.coeffs, TraceConfig{}).state;
  BoundsOptions opt;
  opt.lipschitz_samples = static_cast<int>(state.range(0));
  opt.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(compute_bounds(in.grid, in.coeffs, h0, opt));
}
BENCHMARK(BM_Audit)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
