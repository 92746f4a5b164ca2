#include <benchmark/benchmark.h>

#include "rndiff/capacity.hpp"
#include "rndiff/estimator.hpp"
#include "rndiff/experiment.hpp"
#include "rndiff/selection.hpp"

using namespace rndiff;

namespace {

struct Data {
    SampleSet xp;
    SampleSet xq;
    KernelSpec kernel;
    GramSystem gram;
};

Data make_data(std::size_t n) {
    SampleSet xp = sample_normal(2.0, 5.0, n, 1, MeasureTag::p);
    SampleSet xq = sample_normal(3.0, 0.5, n, 2, MeasureTag::q);
    const KernelSpec kernel = KernelSpec::gaussian_plus_one();
    GramSystem gram = assemble_gram(kernel, xp, xq);
    return {std::move(xp), std::move(xq), kernel, std::move(gram)};
}

void BM_AssembleGram(benchmark::State& state) {
    const Data d = make_data(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_gram(d.kernel, d.xp, d.xq));
    }
}
BENCHMARK(BM_AssembleGram)->Arg(100)->Arg(400)->Arg(1600);

void BM_FitRecursion(benchmark::State& state) {
    const Data d = make_data(static_cast<std::size_t>(state.range(0)));
    const int k = static_cast<int>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_iterated_lavrentiev(d.gram, d.xp, d.xq, d.kernel, 0.1, k));
    }
}
BENCHMARK(BM_FitRecursion)->Args({100, 1})->Args({100, 10})->Args({400, 10})->Args({1600, 10});

void BM_FitSpectral(benchmark::State& state) {
    const Data d = make_data(static_cast<std::size_t>(state.range(0)));
    const RegScheme scheme = RegScheme::iterated_lavrentiev(0.1, 10);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_spectral(d.gram, d.xp, d.xq, d.kernel, scheme));
    }
}
BENCHMARK(BM_FitSpectral)->Arg(100)->Arg(400);

void BM_QuasiOptimality(benchmark::State& state) {
    const Data d = make_data(static_cast<std::size_t>(state.range(0)));
    const LambdaGrid grid;
    for (auto _ : state) {
        benchmark::DoNotOptimize(quasi_optimality(d.gram, d.xp, d.xq, d.kernel, 3, grid));
    }
}
BENCHMARK(BM_QuasiOptimality)->Arg(100)->Arg(400);

void BM_EffectiveDimension(benchmark::State& state) {
    const Data d = make_data(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(effective_dimension(d.gram, 0.1));
    }
}
BENCHMARK(BM_EffectiveDimension)->Arg(100)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
