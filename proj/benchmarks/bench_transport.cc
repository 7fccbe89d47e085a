// Microbenchmarks for the hot paths: oracle construction, polyline tracing,
// and the full dual evaluation at several thread counts.

#include <benchmark/benchmark.h>

#include "curvot/measures.hpp"
#include "curvot/power_diagram.hpp"
#include "curvot/synthetic.hpp"
#include "curvot/transport.hpp"

namespace {

using namespace curvot;

struct Instance {
    AtomicMeasure<2> mu;
    PolylineMeasure<2> nu;
    DualPotential phi;
};

Instance make_instance(int n, int p) {
    Instance inst;
    inst.mu = random_cloud<2>(n, 42);
    inst.nu = random_polyline<2>(p, 43);
    inst.phi = random_potential(n, 44, 0.01);
    return inst;
}

void BM_BuildOracle(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Instance inst = make_instance(n, 16);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_oracle(inst.mu, inst.phi));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_BuildOracle)->Arg(1000)->Arg(10000)->Arg(40000);

void BM_TracePolyline(benchmark::State& state) {
    const Instance inst = make_instance(static_cast<int>(state.range(0)),
                                        static_cast<int>(state.range(1)));
    const NeighborOracle oracle = build_oracle(inst.mu, inst.phi);
    for (auto _ : state) {
        benchmark::DoNotOptimize(trace_polyline(inst.mu, inst.nu, inst.phi, oracle));
    }
    state.SetItemsProcessed(state.iterations() * inst.nu.segment_count());
}
BENCHMARK(BM_TracePolyline)->Args({1000, 100})->Args({10000, 500});

void BM_Evaluate(benchmark::State& state) {
    const Instance inst = make_instance(20000, 8000);
    const NeighborOracle oracle = build_oracle(inst.mu, inst.phi);
    EvalOptions opt;
    opt.threads = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(inst.mu, inst.nu, inst.phi, oracle, opt));
    }
    state.SetItemsProcessed(state.iterations() * inst.nu.segment_count());
}
BENCHMARK(BM_Evaluate)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime();

void BM_Hessian(benchmark::State& state) {
    const Instance inst = make_instance(5000, 400);
    const NeighborOracle oracle = build_oracle(inst.mu, inst.phi);
    const TransportEvaluation ev = evaluate(inst.mu, inst.nu, inst.phi, oracle);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hessian(inst.mu, inst.nu, inst.phi, ev.trace));
    }
}
BENCHMARK(BM_Hessian);

}  // namespace

BENCHMARK_MAIN();
