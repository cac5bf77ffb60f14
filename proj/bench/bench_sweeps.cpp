// Serial reference vs OpenMP for the ensemble kernels.
//   ./bench_sweeps --benchmark_filter=Boundedness

#include <benchmark/benchmark.h>

#include <cmath>

#include "impactosc/sweeps.hpp"

using namespace impactosc;

namespace {

PotentialSpec bench_spec()
{
    PotentialSpec spec = PotentialSpec::unperturbed(1);
    spec.coeffs[0] = FourierSeries(0.0, {0.5}, {});
    spec.coeffs[2] = FourierSeries(0.1, {0.0, 0.2}, {0.15});
    return spec;
}

const ImpactModel& model()
{
    static const ImpactModel m = ImpactModel::build(bench_spec());
    return m;
}

SweepOptions mode(const benchmark::State& state)
{
    return state.range(0) == 0 ? SweepOptions{Execution::Serial, 1} : SweepOptions{Execution::Parallel, 0};
}

void Boundedness(benchmark::State& state)
{
    const auto ics = energy_ladder(16, 10.0, 1e3, 7);
    BoundednessOptions b;
    b.horizon = 50.0;
    for (auto _ : state) {
        auto rep = boundedness_sweep(model().spec, ics, b, {}, mode(state));
        benchmark::DoNotOptimize(rep.records.data());
    }
    state.counters["threads"] = available_threads(mode(state));
}

void PoincareGrid(benchmark::State& state)
{
    std::vector<double> u, th;
    for (int i = 0; i < 8; ++i) {
        u.push_back(1.0 + i / 7.0);
        th.push_back(i / 8.0);
    }
    const auto backend = state.range(1) == 0 ? Backend::Physical : Backend::Direct;
    for (auto _ : state) {
        auto grid = poincare_grid(model(), u, th, 1e-3, backend, {}, mode(state));
        benchmark::DoNotOptimize(grid.data());
    }
    state.counters["threads"] = available_threads(mode(state));
}

void DerivativeScaling(benchmark::State& state)
{
    std::vector<double> I, th, tau{0.13, 0.5, 0.87};
    for (int i = 0; i < 10; ++i) I.push_back(1e3 * std::pow(1e3, i / 9.0));
    for (int i = 0; i < 8; ++i) th.push_back(i / 8.0);
    for (auto _ : state) {
        auto rows = r_derivative_sweep(model(), I, th, tau, 3, mode(state));
        benchmark::DoNotOptimize(rows.data());
    }
    state.counters["threads"] = available_threads(mode(state));
}

}  // namespace

BENCHMARK(Boundedness)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(PoincareGrid)->Args({0, 0})->Args({1, 0})->Args({0, 1})->Args({1, 1})->Unit(benchmark::kMillisecond);
BENCHMARK(DerivativeScaling)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
