#include "hyperstab/certify.hpp"
#include "hyperstab/heatmem.hpp"
#include "hyperstab/solver.hpp"
#include "hyperstab/timescale.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace hyperstab;

void BM_Lemma1Constant(benchmark::State& state)
{
    for (auto _ : state) benchmark::DoNotOptimize(lemma1_constant(2.0, 1.0));
}
BENCHMARK(BM_Lemma1Constant);

void BM_BackwardEulerStep(benchmark::State& state)
{
    HeatMemoryExperiment exp;
    exp.geometry.N = static_cast<int>(state.range(0));
    const auto problem = assemble(exp);
    Eigen::VectorXd x = problem.initialState;
    for (auto _ : state) benchmark::DoNotOptimize(step_backward_euler(problem, x, 0.5, 1e-3));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BackwardEulerStep)->Arg(31)->Arg(63)->Arg(127)->Complexity();

void BM_SimulateShortHorizon(benchmark::State& state)
{
    HeatMemoryExperiment exp;
    exp.geometry.N = 63;
    exp.horizon = 0.1;
    const auto problem = assemble(exp);
    SimOptions options;
    options.dtMax = 1e-3;
    for (auto _ : state) benchmark::DoNotOptimize(simulate(problem, options));
}
BENCHMARK(BM_SimulateShortHorizon);

void BM_SupConstant(benchmark::State& state)
{
    for (auto _ : state) benchmark::DoNotOptimize(theorem3_constant_detailed(3.0));
}
BENCHMARK(BM_SupConstant);

} // namespace

BENCHMARK_MAIN();
