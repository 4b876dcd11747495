#include <benchmark/benchmark.h>

#include "nanorod/grid.hpp"
#include "nanorod/integrator.hpp"
#include "nanorod/liouvillian.hpp"
#include "nanorod/oracle.hpp"
#include "nanorod/state.hpp"

namespace {

using namespace nanorod;

const ModelParams kSet1{0.6, 0.4, -1.0, 0.5, Dynamics::quantum};

PhaseGrid square_grid(std::size_t n) { return build_grid(-8.0, 8.0, -8.0, 8.0, n, n); }

void BM_DerivativeR(benchmark::State& st) {
    const auto g = square_grid(static_cast<std::size_t>(st.range(0)));
    const auto f = sample(g, [](double r, double p) { return complex(std::exp(-r * r - p * p), 0.0); });
    for (auto _ : st) benchmark::DoNotOptimize(d_dr(f));
    st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(g.size()));
}
BENCHMARK(BM_DerivativeR)->Arg(120)->Arg(240);

void BM_ThirdDerivativeP(benchmark::State& st) {
    const auto g = square_grid(static_cast<std::size_t>(st.range(0)));
    const auto f = sample(g, [](double r, double p) { return complex(std::exp(-r * r - p * p), 0.0); });
    for (auto _ : st) benchmark::DoNotOptimize(d3_dp3(f));
    st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(g.size()));
}
BENCHMARK(BM_ThirdDerivativeP)->Arg(120)->Arg(240);

// Fused evaluator used by the integrator.
void BM_LiouvillianApply(benchmark::State& st) {
    const auto g = square_grid(static_cast<std::size_t>(st.range(0)));
    ModelParams p = kSet1;
    p.mode = st.range(1) != 0 ? Dynamics::quantum : Dynamics::classical;
    const SpinPhaseField w = init_coherent_excited(g, -1.6, 0.0, 0.6071);
    SpinPhaseField out(g);
    Liouvillian l(g, SpinBasis::sigma_z, p);
    for (auto _ : st) {
        l.apply(w.flat(), out.flat());
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(g.size()));
}
BENCHMARK(BM_LiouvillianApply)->Args({120, 0})->Args({120, 1})->Args({240, 1});

// Term-by-term assembly, for comparison with the fused path.
void BM_RhsComposed(benchmark::State& st) {
    const auto g = square_grid(120);
    const SpinPhaseField w = init_coherent_excited(g, -1.6, 0.0, 0.6071);
    for (auto _ : st) benchmark::DoNotOptimize(rhs_terms(w, kSet1));
}
BENCHMARK(BM_RhsComposed);

void BM_CashKarpStep(benchmark::State& st) {
    const auto g = square_grid(static_cast<std::size_t>(st.range(0)));
    SpinPhaseField w = init_coherent_excited(g, -1.6, 0.0, 0.6071);
    SpinPhaseField next(g);
    Liouvillian l(g, SpinBasis::sigma_z, kSet1);
    CashKarpStepper stepper(w.flat().size());
    const Derivative f = [&l](double, std::span<const double> y, std::span<double> dy) { l.apply(y, dy); };
    for (auto _ : st) {
        benchmark::DoNotOptimize(stepper.step(w.flat(), 0.0, 1e-4, f, next.flat()));
        std::swap(w, next);
    }
}
BENCHMARK(BM_CashKarpStep)->Arg(120)->Arg(180)->Arg(240)->Unit(benchmark::kMillisecond);

void BM_FieldStep(benchmark::State& st) {
    const auto g = square_grid(static_cast<std::size_t>(st.range(0)));
    SpinPhaseField w = init_coherent_excited(g, -1.6, 0.0, 0.6071);
    SpinPhaseField next(g);
    Liouvillian l(g, SpinBasis::sigma_z, kSet1);
    FieldStepper stepper(l);
    for (auto _ : st) {
        benchmark::DoNotOptimize(stepper.step(w.flat(), 1e-4, next.flat()));
        std::swap(w, next);
    }
}
BENCHMARK(BM_FieldStep)->Arg(120)->Arg(180)->Arg(240)->Unit(benchmark::kMillisecond);

void BM_FockDerivative(benchmark::State& st) {
    const oracle::FockSpec spec{static_cast<std::size_t>(st.range(0))};
    const auto rho = oracle::initial_state(-1.6, 0.0, 0.6071, spec);
    oracle::EvolveSettings es;
    es.dt = 1e-3;
    es.t_end = 1e-3;
    for (auto _ : st) benchmark::DoNotOptimize(oracle::evolve(rho, kSet1, es));
}
BENCHMARK(BM_FockDerivative)->Arg(60)->Arg(120)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
