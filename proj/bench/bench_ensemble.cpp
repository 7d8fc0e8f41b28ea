#include "resavg/measures.hpp"
#include "resavg/rng.hpp"
#include "resavg/simulate.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

using namespace resavg;

Model ou_model() {
    const std::size_t n = 2;
    return {EvaluableField(PolynomialVectorField::linear(n, -1.0)), CMatrix::identity(n),
            FrequencySpectrum({1.0, std::sqrt(2.0)}, ResonanceClass::non_resonant), {1.0, Complex(0.5, 0.5)}};
}

SimulationConfig bench_config(std::size_t n_traj, Execution exec) {
    SimulationConfig c;
    c.epsilon = 0.05;
    c.t_end = 1.0;
    c.dt = c.epsilon / 40.0;
    c.n_traj = n_traj;
    c.master_seed = 42;
    c.execution = exec;
    c.checkpoints = {1.0};
    return c;
}

void interaction_kernel(benchmark::State& state, Execution exec) {
    const auto model = ou_model();
    const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)), exec);
    for (auto _ : state) {
        auto ens = simulate(SimulatorKind::interaction, model, cfg);
        benchmark::DoNotOptimize(ens.raw_terminal().data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<long long>(cfg.steps()));
}

void sliced_distance(benchmark::State& state, Execution exec) {
    const auto model = ou_model();
    const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)), Execution::parallel);
    const auto a = checkpoint_measure(simulate(SimulatorKind::interaction, model, cfg), 1.0);
    const auto b = checkpoint_measure(simulate(SimulatorKind::effective, model, cfg), 1.0);
    for (auto _ : state) {
        Rng rng(7);
        benchmark::DoNotOptimize(sliced_w1(a, b, 128, rng, exec));
    }
}

void BM_InteractionSerial(benchmark::State& s) { interaction_kernel(s, Execution::serial); }
void BM_InteractionParallel(benchmark::State& s) { interaction_kernel(s, Execution::parallel); }
void BM_SlicedW1Serial(benchmark::State& s) { sliced_distance(s, Execution::serial); }
void BM_SlicedW1Parallel(benchmark::State& s) { sliced_distance(s, Execution::parallel); }

}  // namespace

BENCHMARK(BM_InteractionSerial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_InteractionParallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SlicedW1Serial)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SlicedW1Parallel)->Arg(4000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
