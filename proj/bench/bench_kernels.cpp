// Assembly-kernel benchmarks: the OpenMP-parallel energy and gradient
// kernels against the plain serial reference implementations, over a range
// of mesh sizes and gauges. Run with --benchmark_filter=... to narrow.

#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>

#include "fpl/discrete.hpp"
#include "fpl/field.hpp"
#include "fpl/mesh.hpp"
#include "fpl/norms.hpp"
#include "fpl/rng.hpp"

namespace {

using namespace fpl;

struct Workload {
    Mesh mesh;
    Mesh cross;
    Field u;
    Field f;

    Workload(double ell, double h)
        : mesh(build_cylinder(ell, 1, {{0.0, 1.0}}, h, h)),
          cross(build_cross_section({{0.0, 1.0}}, h)),
          u(Field::zeros(mesh)),
          f(Field::zeros(cross, false)) {
        Rng rng(42);
        for (std::int64_t i = 0; i < mesh.node_count; ++i)
            if (!mesh.dirichlet[static_cast<std::size_t>(i)])
                u.values[static_cast<std::size_t>(i)] = rng.uniform(-1.0, 1.0);
        for (auto& v : f.values) v = 1.0;
    }
};

// state.range(0): cylinder length; mesh node count scales linearly with it.
const Workload& workload_for(std::int64_t ell) {
    static const Workload small(4.0, 1.0 / 32.0);
    static const Workload medium(16.0, 1.0 / 32.0);
    static const Workload large(64.0, 1.0 / 32.0);
    if (ell <= 4) return small;
    if (ell <= 16) return medium;
    return large;
}

NormSpec gauge_for(std::int64_t id) {
    switch (id) {
        case 0: return parse_norm("qnorm(2)", 1, 2);
        case 1: return parse_norm("qnorm(3)", 1, 2);
        default: return parse_norm("split(3; qnorm(3); qnorm(3))", 1, 2);
    }
}

double p_for(std::int64_t id) { return id == 0 ? 2.0 : 3.0; }

void report(benchmark::State& state, const Workload& w) {
    state.SetItemsProcessed(state.iterations() * w.mesh.simplex_count);
    state.SetLabel(std::to_string(w.mesh.node_count) + " nodes");
}

void BM_energy_parallel(benchmark::State& state) {
    const Workload& w = workload_for(state.range(0));
    const NormSpec spec = gauge_for(state.range(1));
    const double p = p_for(state.range(1));
    for (auto _ : state) {
        EnergyBreakdown e = energy(spec, p, w.u, &w.f);
        benchmark::DoNotOptimize(e.total);
    }
    report(state, w);
}

void BM_energy_serial(benchmark::State& state) {
    const Workload& w = workload_for(state.range(0));
    const NormSpec spec = gauge_for(state.range(1));
    const double p = p_for(state.range(1));
    for (auto _ : state) {
        EnergyBreakdown e = energy_serial(spec, p, w.u, &w.f);
        benchmark::DoNotOptimize(e.total);
    }
    report(state, w);
}

void BM_gradient_parallel(benchmark::State& state) {
    const Workload& w = workload_for(state.range(0));
    const NormSpec spec = gauge_for(state.range(1));
    const double p = p_for(state.range(1));
    Field out = Field::zeros(w.mesh);
    for (auto _ : state) {
        const bool ok = try_energy_gradient(spec, p, w.u, &w.f, out);
        benchmark::DoNotOptimize(ok);
        benchmark::DoNotOptimize(out.values.data());
    }
    report(state, w);
}

void BM_gradient_serial(benchmark::State& state) {
    const Workload& w = workload_for(state.range(0));
    const NormSpec spec = gauge_for(state.range(1));
    const double p = p_for(state.range(1));
    Field out = Field::zeros(w.mesh);
    for (auto _ : state) {
        const bool ok = try_energy_gradient_serial(spec, p, w.u, &w.f, out);
        benchmark::DoNotOptimize(ok);
        benchmark::DoNotOptimize(out.values.data());
    }
    report(state, w);
}

void kernel_args(benchmark::internal::Benchmark* b) {
    for (std::int64_t ell : {4, 16, 64})
        for (std::int64_t gauge : {0, 1, 2}) b->Args({ell, gauge});
    b->ArgNames({"ell", "gauge"});
}

BENCHMARK(BM_energy_parallel)->Apply(kernel_args);
BENCHMARK(BM_energy_serial)->Apply(kernel_args);
BENCHMARK(BM_gradient_parallel)->Apply(kernel_args);
BENCHMARK(BM_gradient_serial)->Apply(kernel_args);

} // namespace

BENCHMARK_MAIN();
