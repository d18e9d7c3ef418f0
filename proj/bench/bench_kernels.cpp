// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "epm/moments.hpp"
#include "epm/nhh.hpp"
#include "epm/oracle.hpp"
#include "epm/spectral.hpp"

using namespace epm;

namespace {

struct Setup {
    QuadraticGenerator gen;
    FockSpace space;
    CMatrix rho;

    Setup(int n_modes, int cutoff)
        : gen(QuadraticGenerator::from_system(n_modes == 2 ? QuadraticSystem::anti_pt_bimodal(1.0, 1.0, 0.8)
                                                           : lattice_system(synthesize_lattice(build_m_n(2, 1.0, 0.8, 1.0))))),
          space(n_modes, cutoff) {
        std::vector<Complex> alphas(n_modes, Complex(0.4, 0.1));
        rho = coherent_state(alphas, space).rho;
    }
};

void BM_RhsReference(benchmark::State& state) {
    const Setup s(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(lindblad_rhs_reference(s.gen, s.rho, s.space));
    state.counters["dim"] = static_cast<double>(s.space.dim());
}

void BM_RhsKernel(benchmark::State& state) {
    const Setup s(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    const LindbladKernel kernel(s.gen, s.space);
    const int threads = static_cast<int>(state.range(2));
    omp_set_num_threads(threads);
    CMatrix out;
    for (auto _ : state) {
        kernel.apply(s.rho, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.counters["dim"] = static_cast<double>(s.space.dim());
    state.counters["threads"] = threads;
}

void BM_Sweep(benchmark::State& state) {
    const auto grid = linspace(0.0, 2.0, 200);
    const int threads = static_cast<int>(state.range(0));
    const MatrixBuilder builder = [](double g) { return build_m_n(8, 1.0, g, 1.0).matrix; };
    for (auto _ : state) benchmark::DoNotOptimize(sweep("gamma12", builder, grid, threads));
    state.counters["threads"] = threads;
}

}  // namespace

BENCHMARK(BM_RhsReference)->Args({2, 4})->Args({2, 8})->Args({3, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RhsKernel)
    ->ArgsProduct({{2}, {4, 8, 12}, {1, 2, 4}})
    ->Args({3, 4, 1})
    ->Args({3, 4, 4})
    ->Args({3, 6, 1})
    ->Args({3, 6, 4})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Sweep)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
