#include <benchmark/benchmark.h>

#include "stcp/criterion.hpp"
#include "stcp/search.hpp"
#include "stcp/simulate.hpp"

namespace {

using namespace stcp;

void BM_pelt_detect(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const int t_total = static_cast<int>(state.range(1));
    SpatialDomain domain = make_grid_domain(side, side);
    NeighborGraph graph = build_neighbors(domain, 2.0);
    ModelOrder order = make_order(Family::SepExpAr, MeanKind::Zero);
    Eigen::VectorXd th1(3), th2(3);
    th1 << -0.5, 0.6, 1.0;
    th2 << -0.2, 0.6, 1.0;
    PiecewiseSpec spec{domain, {{t_total / 2, order, th1}, {t_total / 2, order, th2}}, 7};
    PiecewiseData pd = gen_piecewise(spec);
    PairConfig pc{1, graph};
    const double c_kn = normalizing_constant(t_total, pc);
    CompositeLikelihood lik(pd.data, pc);
    OptimizerConfig opt;
    SearchConfig cfg;
    for (auto _ : state) {
        // Fresh cache per iteration: the sweep is what is being measured.
        SegmentCostModel model(lik, {order}, opt, c_kn, 55);
        benchmark::DoNotOptimize(pelt_detect(model, cfg));
    }
}
BENCHMARK(BM_pelt_detect)
    ->Args({6, 60})
    ->Args({6, 100})
    ->Args({10, 100})
    ->Unit(benchmark::kMillisecond);

void BM_exact_detect(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const int t_total = static_cast<int>(state.range(1));
    SpatialDomain domain = make_grid_domain(side, side);
    NeighborGraph graph = build_neighbors(domain, 2.0);
    ModelOrder order = make_order(Family::SepExpAr, MeanKind::Zero);
    Eigen::VectorXd th1(3);
    th1 << -0.5, 0.6, 1.0;
    PiecewiseSpec spec{domain, {{t_total, order, th1}}, 9};
    PiecewiseData pd = gen_piecewise(spec);
    PairConfig pc{1, graph};
    CompositeLikelihood lik(pd.data, pc);
    OptimizerConfig opt;
    SearchConfig cfg;
    for (auto _ : state) {
        SegmentCostModel model(lik, {order}, opt, normalizing_constant(t_total, pc), 55);
        benchmark::DoNotOptimize(exact_detect(model, cfg));
    }
}
BENCHMARK(BM_exact_detect)->Args({4, 40})->Args({4, 60})->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
