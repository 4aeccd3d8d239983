#include <benchmark/benchmark.h>

#include <face/gcv.hpp>
#include <face/sim.hpp>
#include <face/solver.hpp>

using namespace face;

namespace {

SimulatedData sample(int n) {
    RandomStream rng(1, 0);
    return gen_case1(n, MSet::I1, 2.0, rng);
}

GroupedProblem ols_problem(const SimulatedData& sim) {
    const SplineBasis basis = make_basis(sim.data.pooled_times());
    return covariance_problem(build_design(sim.data, basis, raw_covariances(sim.data, MeanFit::zero())));
}

void BM_FitTwoStep(benchmark::State& state) {
    const auto sim = sample(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fit_two_step(sim.data));
}
BENCHMARK(BM_FitTwoStep)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Precompute(benchmark::State& state) {
    const GroupedProblem p = ols_problem(sample(static_cast<int>(state.range(0))));
    const Diagonalization d = diagonalize(cross_products(p).XtWX, p.Q);
    for (auto _ : state) benchmark::DoNotOptimize(precompute(p, d));
}
BENCHMARK(BM_Precompute)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_IgcvSweep(benchmark::State& state) {
    const GroupedProblem p = ols_problem(sample(100));
    const Diagonalization d = diagonalize(cross_products(p).XtWX, p.Q);
    const GcvPrecomp pre = precompute(p, d);
    const auto grid = LambdaGrid{}.values();
    for (auto _ : state) {
        double best = 0.0;
        for (double lambda : grid) best += igcv_value(pre, d.s, lambda);
        benchmark::DoNotOptimize(best);
    }
}
BENCHMARK(BM_IgcvSweep)->Unit(benchmark::kMillisecond);

void BM_ExactIcvSweep(benchmark::State& state) {
    const GroupedProblem p = ols_problem(sample(100));
    const Diagonalization d = diagonalize(cross_products(p).XtWX, p.Q);
    const auto grid = LambdaGrid{1e-6, 1e6, 10}.values();
    for (auto _ : state) {
        double total = 0.0;
        for (double lambda : grid) total += exact_icv(p, lambda, d.ridge);
        benchmark::DoNotOptimize(total);
    }
}
BENCHMARK(BM_ExactIcvSweep)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
