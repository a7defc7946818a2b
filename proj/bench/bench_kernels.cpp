#include <vector>

#include <benchmark/benchmark.h>

#include "mvldp/kernels.hpp"
#include "mvldp/mvsolve.hpp"
#include "mvldp/triple.hpp"

namespace {

using namespace mvldp;

ModelConfig bench_model(ModelKind kind, std::size_t n) {
    ModelConfig m;
    m.kind = kind;
    m.n = n;
    m.T = 1.0;
    m.exponent = kind == ModelKind::mv_sde || kind == ModelKind::linear_sde ? 2.0 : 3.0;
    m.kappa = 0.5;
    m.a = 1.0;
    m.initial.assign(n, 0.5);
    return m;
}

template <ExecPolicy Policy>
void BM_Advance(benchmark::State& state) {
    const DiscretizedTriple triple(bench_model(ModelKind::p_laplace, 16));
    const std::size_t replicas = static_cast<std::size_t>(state.range(0));
    const std::size_t K = 400;
    const double dt = triple.config().T / static_cast<double>(K);
    const MeasureFlow flow = MeasureFlow::constant(uniform_grid(triple.horizon(), K),
                                                  EmpiricalMeasure::dirac(triple.initial_state()));
    std::vector<StepJumps> jumps;
    for (std::size_t i = 0; i < replicas; ++i)
        jumps.push_back(StepJumps::bucket(replica_stream(triple, 0.1, 7, i), dt, K));
    const FrozenSegment seg{triple, flow, 0.1, dt, 0, K};
    for (auto _ : state) {
        std::vector<Path> paths(replicas, Path(triple.config().T, K, triple.dim()));
        for (auto& p : paths) p.states.col(0) = triple.initial_state();
        advance_replicas(Policy, seg, jumps, paths);
        benchmark::DoNotOptimize(paths.back().states.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * replicas * K));
}

template <ExecPolicy Policy>
void BM_Particles(benchmark::State& state) {
    const DiscretizedTriple triple(bench_model(ModelKind::mv_sde, 4));
    SolverOptions opts;
    opts.K_steps = 100;
    opts.policy = Policy;
    const std::size_t particles = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        const Ensemble ens = particle_system(triple, particles, 0.5, 11, opts);
        benchmark::DoNotOptimize(ens.paths.back().states.data());
    }
}

}  // namespace

BENCHMARK(BM_Advance<mvldp::ExecPolicy::serial>)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Advance<mvldp::ExecPolicy::parallel>)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Particles<mvldp::ExecPolicy::serial>)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Particles<mvldp::ExecPolicy::parallel>)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
