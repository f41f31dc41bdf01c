// Serial reference against OpenMP kernels on radial grids of growing size,
// plus the two naturally parallel workloads (sweep points, VMC chains).

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "gptrap/asymptotics.hpp"
#include "gptrap/core.hpp"
#include "gptrap/gp_solver.hpp"
#include "gptrap/kernels.hpp"
#include "gptrap/vmc.hpp"

using namespace gptrap;

namespace {

struct Fixture {
  kernels::SemStiffness k;
  std::vector<double> w, v, phi, out;

  explicit Fixture(int n) {
    const auto grid = build_radial_grid(3, 20.0, n);
    k = kernels::build_sem_stiffness(n, grid.spacing(), 3);
    w.assign(grid.weights().begin(), grid.weights().end());
    for (double r : grid.nodes()) {
      v.push_back(r * r);
      phi.push_back(std::exp(-0.5 * r * r));
    }
    out.resize(static_cast<std::size_t>(n));
  }
};

int nodes(const benchmark::State& s) { return static_cast<int>(s.range(0)) + 1; }

void BM_StiffnessSerial(benchmark::State& s) {
  Fixture f(nodes(s));
  for (auto _ : s) {
    kernels::serial::apply_stiffness(f.k, f.phi, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
}

void BM_StiffnessParallel(benchmark::State& s) {
  Fixture f(nodes(s));
  for (auto _ : s) {
    kernels::parallel::apply_stiffness(f.k, f.phi, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
}

void BM_MomentsSerial(benchmark::State& s) {
  Fixture f(nodes(s));
  for (auto _ : s) benchmark::DoNotOptimize(kernels::serial::moments(f.w, f.v, f.phi));
}

void BM_MomentsParallel(benchmark::State& s) {
  Fixture f(nodes(s));
  for (auto _ : s) benchmark::DoNotOptimize(kernels::parallel::moments(f.w, f.v, f.phi));
}

void BM_ResidualSerial(benchmark::State& s) {
  Fixture f(nodes(s));
  for (auto _ : s) benchmark::DoNotOptimize(kernels::serial::residual(f.k, f.w, f.v, 0.1, 3.0, f.phi));
}

void BM_ResidualParallel(benchmark::State& s) {
  Fixture f(nodes(s));
  for (auto _ : s) benchmark::DoNotOptimize(kernels::parallel::residual(f.k, f.w, f.v, 0.1, 3.0, f.phi));
}

void BM_Sweep(benchmark::State& s) {
  const auto trap = TrapPotential::homogeneous(2.0);
  const std::vector<double> Ng = {10.0, 30.0, 100.0, 300.0};
  for (auto _ : s) benchmark::DoNotOptimize(gp_tf_sweep(trap, 3, Ng));
}

void BM_VmcChains(benchmark::State& s) {
  const auto trap = TrapPotential::homogeneous(2.0);
  const auto trial = TrialFunction::product(minimize_gp(trap, 5.0, 0.5, policy_grid(trap, 3, 5.0, 0.5)));
  const auto cfg = initial_configuration(trial, 5, 1);
  VmcOptions o;
  o.steps = 10000;
  o.chains = static_cast<int>(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(run_vmc(trial, trap, nullptr, cfg, o).energy_mean);
}

}  // namespace

BENCHMARK(BM_StiffnessSerial)->RangeMultiplier(8)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_StiffnessParallel)->RangeMultiplier(8)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_MomentsSerial)->RangeMultiplier(8)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_MomentsParallel)->RangeMultiplier(8)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_ResidualSerial)->RangeMultiplier(8)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_ResidualParallel)->RangeMultiplier(8)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_Sweep)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VmcChains)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
