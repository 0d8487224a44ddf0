// Serial reference against the OpenMP path for the hot kernels. Both paths
// produce identical results; only the wall time differs.

#include "depctl/channel.hpp"
#include "depctl/dependence.hpp"
#include "depctl/orders.hpp"
#include "depctl/queueing.hpp"

#include <benchmark/benchmark.h>

using namespace depctl;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

void BM_SampleCapacity(benchmark::State& state) {
    ChannelModel m;
    m.n_r = m.n_t = 4;
    CapacityParams p;
    p.rho = 10.0;
    p.n_t = 4;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            sample_capacity(m, DistributionSpec::constant(1.0), p, RandomStream(1, "bench"), 20000, exec_of(state)));
    label(state);
}

void BM_StopLoss(benchmark::State& state) {
    RandomStream s(2, "bench");
    const auto xs = sample(DistributionSpec::exponential(1.0), s, 100000);
    const auto grid = pooled_grid({&xs});
    for (auto _ : state)
        benchmark::DoNotOptimize(stop_loss(xs, grid, RandomStream(3, "boot"), {}, exec_of(state)));
    label(state);
}

void BM_GenProcess(benchmark::State& state) {
    ProcessSpec p;
    p.T = 16;
    p.coords = 1;
    p.marginals = {DistributionSpec::exponential(1.0)};
    p.temporal = CopulaSpec::gaussian_ar1(-0.6, 16);
    for (auto _ : state) benchmark::DoNotOptimize(gen_process(p, RandomStream(4, "bench"), 20000, exec_of(state)));
    label(state);
}

void BM_BacklogStats(benchmark::State& state) {
    QueueConfig c;
    c.T = 2000;
    c.paths = 200;
    c.arrival.T = c.T;
    c.arrival.marginals = {DistributionSpec::exponential(1.25)};
    c.arrival.temporal = CopulaSpec::independence(c.T);
    ProcessSpec service = c.arrival;
    service.marginals = {DistributionSpec::constant(1.0)};
    c.service = service;
    for (auto _ : state) benchmark::DoNotOptimize(backlog_stats(c, RandomStream(5, "bench"), exec_of(state)));
    label(state);
}

} // namespace

BENCHMARK(BM_SampleCapacity)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StopLoss)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenProcess)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BacklogStats)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
