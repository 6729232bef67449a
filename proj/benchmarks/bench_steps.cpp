#include "ofmf/factorization.hpp"
#include "ofmf/forecaster.hpp"
#include "ofmf/random.hpp"

#include <benchmark/benchmark.h>

using namespace ofmf;

namespace {

struct StepInput {
    ObservationSlice slice;
    Priors priors;
};

StepInput make_input(int d, std::size_t M, double nnz) {
    Rng rng(42);
    StepInput in;
    in.slice.t = 30;
    std::vector<double> values;
    for (std::size_t i = 0; i < M; ++i) {
        if (rng.bernoulli(nnz)) {
            in.slice.indices.push_back(i);
            values.push_back(rng.uniform());
        }
    }
    in.slice.values = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    in.priors.U_bar = Matrix(d, static_cast<Eigen::Index>(M));
    for (Eigen::Index k = 0; k < in.priors.U_bar.size(); ++k) in.priors.U_bar(k) = rng.uniform();
    in.priors.v_bar = Vector(d);
    for (int k = 0; k < d; ++k) in.priors.v_bar(k) = rng.symmetric(0.2);
    return in;
}

void BM_FpStep(benchmark::State& state) {
    const StepInput in = make_input(static_cast<int>(state.range(0)), static_cast<std::size_t>(state.range(1)), 0.7);
    const FpParams params;
    for (auto _ : state) benchmark::DoNotOptimize(fp_step(in.slice, in.priors, params));
}

void BM_FtStep(benchmark::State& state) {
    const StepInput in = make_input(static_cast<int>(state.range(0)), static_cast<std::size_t>(state.range(1)), 0.7);
    FtParams params;
    params.eps = 1e-3;
    for (auto _ : state) benchmark::DoNotOptimize(ft_step(in.slice, in.priors, params));
}

void BM_ZtStep(benchmark::State& state) {
    const StepInput in = make_input(static_cast<int>(state.range(0)), static_cast<std::size_t>(state.range(1)), 0.7);
    const ZtParams params;
    for (auto _ : state) benchmark::DoNotOptimize(zt_step(in.slice, in.priors, params));
}

// Full forecaster step: forecast, E-step, history push and M-step.
void BM_ForecasterStep(benchmark::State& state) {
    ForecasterConfig cfg;
    cfg.method = static_cast<Method>(state.range(0));
    cfg.eps = 1e-3;
    const std::size_t M = 370;
    ForecasterState s = init_forecaster(cfg, M);
    Rng rng(3);
    ObservationSlice slice;
    slice.indices.resize(M);
    for (std::size_t i = 0; i < M; ++i) slice.indices[i] = i;
    slice.values = Vector(static_cast<Eigen::Index>(M));
    std::size_t t = 0;
    for (auto _ : state) {
        slice.t = ++t;
        for (Eigen::Index i = 0; i < slice.values.size(); ++i) slice.values(i) = 0.5 + 0.1 * rng.symmetric(1.0);
        benchmark::DoNotOptimize(step(s, slice));
    }
}

}  // namespace

BENCHMARK(BM_FpStep)->Args({5, 370})->Args({20, 370})->Args({5, 5000});
BENCHMARK(BM_FtStep)->Args({5, 370})->Args({20, 370})->Args({5, 5000});
BENCHMARK(BM_ZtStep)->Args({5, 370})->Args({20, 370})->Args({5, 5000});
BENCHMARK(BM_ForecasterStep)
    ->Arg(static_cast<int>(Method::FP))
    ->Arg(static_cast<int>(Method::FT))
    ->Arg(static_cast<int>(Method::ZT))
    ->Arg(static_cast<int>(Method::NAIVE));
