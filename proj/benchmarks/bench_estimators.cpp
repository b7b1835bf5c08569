#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "huberfactor/estimators.hpp"
#include "huberfactor/huber.hpp"
#include "huberfactor/rank_select.hpp"
#include "huberfactor/synth.hpp"

using namespace huberfactor;

namespace {

const GroundTruth& panel_for(Index n) {
    static std::map<Index, GroundTruth> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gen_scenario(scenario_config('A', 2, n, n, 7))).first;
    return it->second;
}

void BM_HuberRegress(benchmark::State& state) {
    const Index n = state.range(0);
    std::mt19937_64 rng(11);
    std::student_t_distribution<double> noise(3.0);
    std::normal_distribution<double> z;
    Matrix x(n, 3);
    for (Index i = 0; i < x.size(); ++i) x(i) = z(rng);
    Vector y = x * Vector::Constant(3, 1.0);
    for (Index i = 0; i < n; ++i) y(i) += noise(rng);
    for (auto _ : state) benchmark::DoNotOptimize(huber_regress(y, x, HuberConfig{}));
}
BENCHMARK(BM_HuberRegress)->Arg(100)->Arg(1000);

void BM_FitPca(benchmark::State& state) {
    const GroundTruth& g = panel_for(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fit_pca(g.panel, 3));
}
BENCHMARK(BM_FitPca)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_FitHpca(benchmark::State& state) {
    const GroundTruth& g = panel_for(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fit_hpca(g.panel, 3));
}
BENCHMARK(BM_FitHpca)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_FitIhr(benchmark::State& state) {
    const GroundTruth& g = panel_for(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fit_ihr(g.panel, 3));
}
BENCHMARK(BM_FitIhr)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_KendallMoment(benchmark::State& state) {
    const GroundTruth& g = panel_for(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(spatial_kendall_moment(g.panel));
}
BENCHMARK(BM_KendallMoment)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_RankRmHpca(benchmark::State& state) {
    const GroundTruth& g = panel_for(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(estimate_rank_rm(g.panel, 8, Method::hpca));
}
BENCHMARK(BM_RankRmHpca)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
