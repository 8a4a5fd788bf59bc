#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "qsd/estimator.hpp"
#include "qsd/measures.hpp"
#include "qsd/redistribution.hpp"
#include "qsd/return_process.hpp"

using namespace qsd;

namespace {

std::shared_ptr<const Domain> unit() { return std::make_shared<const Domain>(Domain::interval(0.0, 1.0)); }

RedistributionPolicy policy_for(int i) {
    switch (i) {
        case 1: return RedistributionPolicy::quantized(0.01);
        case 2: return RedistributionPolicy::sliding_window(WindowRule::sqrt());
        default: return RedistributionPolicy::full();
    }
}

}  // namespace

// Euler loop of the self-interacting chain, per step.
static void BM_ChainStep(benchmark::State& state) {
    const auto model = SdeModel::brownian(1.0);
    const auto sched = StepSchedule::polynomial(0.1, 0.7);
    QsdChain chain(model, unit(), sched, policy_for(static_cast<int>(state.range(0))), Point{0.5}, RngStream(1, 0));
    for (auto _ : state) chain.step();
    benchmark::DoNotOptimize(chain.state());
    state.SetItemsProcessed(state.iterations());
    state.SetLabel(chain.policy_state().policy().describe());
}
BENCHMARK(BM_ChainStep)->Arg(0)->Arg(1)->Arg(2);

// Restart draw from a full occupation measure of the given size.
static void BM_RestartSample(benchmark::State& state) {
    RedistributionState s(RedistributionPolicy::full(), unit(), Point{0.5});
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int64_t i = 0; i < state.range(0); ++i) s.record_visit(Point{u(g)}, 1.0 / (1.0 + static_cast<double>(i)));
    const RngStream rng(5, 0);
    std::uint64_t step = 0;
    for (auto _ : state) benchmark::DoNotOptimize(s.sample_restart(rng, step++));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RestartSample)->Range(1 << 10, 1 << 22);

// Exact 1-d W1 against the sin reference.
static void BM_W1Reference(benchmark::State& state) {
    std::mt19937_64 g(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
    for (double& x : xs) x = u(g);
    const auto law = EmpiricalLaw::from_samples(xs);
    const auto ref = ReferenceQsd::bm_interval(0.0, 1.0, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(wasserstein1_1d(law, ref));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_W1Reference)->Range(1 << 8, 1 << 20)->Complexity();

// One replica of the killed Euler scheme for A1 at x = 0.5.
static void BM_OperatorAReplica(benchmark::State& state) {
    const auto model = SdeModel::brownian(1.0);
    const Domain d = Domain::interval(0.0, 1.0);
    const auto sched = StepSchedule::constant(1e-4);
    const TestFunction one = [](const Point&) { return 1.0; };
    ReplicaOptions ro;
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_A(model, d, sched, one, Point{0.5}, 2, ro));
        ++ro.seed;
    }
}
BENCHMARK(BM_OperatorAReplica)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
