#include <benchmark/benchmark.h>

#include <vector>

#include "aclab/initial_data.hpp"
#include "aclab/kernels.hpp"
#include "aclab/mcf_reference.hpp"
#include "aclab/measures.hpp"
#include "aclab/varifold.hpp"

using namespace aclab;

namespace {

const double kEps = 0.04;

// flower domain with a prepared line interface, h passed in 1e-4 units
struct Setup {
    PotentialSpec p = PotentialSpec::quartic();
    DomainGeometry g;
    PreparedField pf;
    explicit Setup(double h)
        : g(build_domain(DomainSpec::flower(1.0, 0.2, 3), h)), pf(prepare(g, p, InterfaceSpec::vertical_line(-0.3), kEps)) {}
};

double h_of(const benchmark::State& st) { return static_cast<double>(st.range(0)) * 1e-4; }

void BM_BuildDomain(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(build_domain(DomainSpec::flower(1.0, 0.2, 3), h_of(st)));
}
BENCHMARK(BM_BuildDomain)->Arg(100)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_Prepare(benchmark::State& st) {
    auto p = PotentialSpec::quartic();
    auto g = build_domain(DomainSpec::flower(1.0, 0.2, 3), h_of(st));
    for (auto _ : st) benchmark::DoNotOptimize(prepare(g, p, InterfaceSpec::vertical_line(-0.3), kEps));
}
BENCHMARK(BM_Prepare)->Arg(100)->Unit(benchmark::kMillisecond);

template <Scheme S>
void BM_Step(benchmark::State& st) {
    Setup su(h_of(st));
    Solver s(su.g, su.p, kEps, StepPolicy{S});
    auto f = s.make_field(su.pf.u);
    for (auto _ : st) s.step(f);
    st.counters["cells"] = static_cast<double>(su.g.active_cells().size());
    st.SetItemsProcessed(st.iterations() * static_cast<long>(su.g.active_cells().size()));
}
BENCHMARK_TEMPLATE(BM_Step, Scheme::Explicit)->Arg(100)->Arg(50)->Unit(benchmark::kMicrosecond);
BENCHMARK_TEMPLATE(BM_Step, Scheme::SemiImplicit)->Arg(100)->Arg(50)->Unit(benchmark::kMicrosecond);

void BM_Snapshot(benchmark::State& st) {
    Setup su(h_of(st));
    Solver s(su.g, su.p, kEps);
    auto f = s.make_field(su.pf.u);
    for (auto _ : st) benchmark::DoNotOptimize(snapshot(s, f));
}
BENCHMARK(BM_Snapshot)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_DensityRatio(benchmark::State& st) {
    Setup su(h_of(st));
    Solver s(su.g, su.p, kEps);
    auto m = snapshot(s, s.make_field(su.pf.u));
    for (auto _ : st) benchmark::DoNotOptimize(density_ratio(m, su.g));
}
BENCHMARK(BM_DensityRatio)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ReflectedKernel(benchmark::State& st) {
    Setup su(h_of(st));
    Solver s(su.g, su.p, kEps);
    auto m = snapshot(s, s.make_field(su.pf.u));
    const KernelProbe probe{"upper", {-0.3, 1.10294}, 0.06};
    for (auto _ : st) benchmark::DoNotOptimize(kernel_sums(m, su.g, probe, KernelVariant::Reflected));
}
BENCHMARK(BM_ReflectedKernel)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_FirstVariation(benchmark::State& st) {
    Setup su(h_of(st));
    Solver s(su.g, su.p, kEps);
    auto f = s.make_field(su.pf.u);
    s.evaluate_rhs(f);
    auto v = VectorFieldSpec::constant({1.0, 0.0});
    for (auto _ : st) benchmark::DoNotOptimize(first_variation(s, f, v));
}
BENCHMARK(BM_FirstVariation)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_ContactAngle(benchmark::State& st) {
    Setup su(h_of(st));
    Solver s(su.g, su.p, kEps);
    auto f = s.make_field(su.pf.u);
    for (auto _ : st) benchmark::DoNotOptimize(contact_angle(f, su.g));
}
BENCHMARK(BM_ContactAngle)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_FrontStep(benchmark::State& st) {
    auto g = build_domain(DomainSpec::disk(1.0), 0.01);
    const Front start = Front::circle({0.0, 0.0}, 0.5, 0.01);
    for (auto _ : st) benchmark::DoNotOptimize(evolve_front(start, 1e-3, g));
}
BENCHMARK(BM_FrontStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
