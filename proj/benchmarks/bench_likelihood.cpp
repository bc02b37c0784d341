#include <benchmark/benchmark.h>

#include "stcp/likelihood.hpp"
#include "stcp/simulate.hpp"

namespace {

using namespace stcp;

struct Fixture {
    SpatialDomain domain;
    PairConfig cfg;
    Eigen::MatrixXd data;
    ModelOrder order;
    Eigen::VectorXd theta;
};

Fixture make_fixture(int side, int t_total) {
    SpatialDomain domain = make_grid_domain(side, side);
    NeighborGraph graph = build_neighbors(domain, 2.0);
    ModelOrder order = make_order(Family::SepExpAr, MeanKind::Zero);
    Eigen::VectorXd theta(3);
    theta << -0.5, 0.6, 1.0;
    Rng rng(99);
    SegmentSpec spec{t_total, order, theta};
    Eigen::MatrixXd data = gen_ar_spatial(domain, spec, rng);
    return {std::move(domain), PairConfig{1, std::move(graph)}, std::move(data), order, theta};
}

void BM_pooled_value(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    Fixture fx = make_fixture(side, 100);
    CompositeLikelihood lik(fx.data, fx.cfg);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lik.value(10, 90, fx.order, fx.theta));
    }
}
BENCHMARK(BM_pooled_value)->Arg(6)->Arg(10)->Arg(20);

void BM_direct_value(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    Fixture fx = make_fixture(side, 100);
    CompositeLikelihood lik(fx.data, fx.cfg);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lik.value_direct(10, 90, fx.order, fx.theta));
    }
}
BENCHMARK(BM_direct_value)->Arg(6)->Arg(10);

void BM_precompute(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    Fixture fx = make_fixture(side, 100);
    for (auto _ : state) {
        CompositeLikelihood lik(fx.data, fx.cfg);
        benchmark::DoNotOptimize(lik.t_total());
    }
}
BENCHMARK(BM_precompute)->Arg(10)->Arg(20);

void BM_segment_fit(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    Fixture fx = make_fixture(side, 100);
    CompositeLikelihood lik(fx.data, fx.cfg);
    OptimizerConfig opt;
    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(lik.fit(0, 100, fx.order, opt, seed++));
    }
}
BENCHMARK(BM_segment_fit)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

} // namespace
