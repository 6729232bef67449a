#include "ofmf/ar_lmmse.hpp"
#include "ofmf/linalg.hpp"
#include "ofmf/random.hpp"

#include <benchmark/benchmark.h>

using namespace ofmf;

namespace {

void BM_LmmseUpdateSolve(benchmark::State& state) {
    const auto P = static_cast<std::size_t>(state.range(0));
    const int d = 5;
    Rng rng(1);
    Matrix patch(d, static_cast<Eigen::Index>(P));
    for (Eigen::Index k = 0; k < patch.size(); ++k) patch(k) = rng.symmetric(1.0);
    Vector v(d);
    for (int k = 0; k < d; ++k) v(k) = rng.symmetric(1.0);
    ARState ar = lmmse_init(P, 1.0);
    for (auto _ : state) {
        ar = lmmse_update(std::move(ar), patch, v);
        ar.theta = lmmse_solve(ar);
        benchmark::DoNotOptimize(ar.theta.data());
    }
}

void BM_SolveSpd(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    Rng rng(2);
    Matrix G(n, n);
    for (Eigen::Index k = 0; k < G.size(); ++k) G(k) = rng.symmetric(1.0);
    const Matrix A = G * G.transpose() + Matrix::Identity(n, n);
    Vector b(n);
    for (Eigen::Index k = 0; k < n; ++k) b(k) = rng.symmetric(1.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_spd(A, b));
}

void BM_SymEig(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    Rng rng(3);
    Matrix G(n, n);
    for (Eigen::Index k = 0; k < G.size(); ++k) G(k) = rng.symmetric(1.0);
    const Matrix S = G * G.transpose();
    for (auto _ : state) benchmark::DoNotOptimize(sym_eig(S));
}

// Polynomials with well separated real roots, degree 2d as in the exact FT latent update.
void BM_RealRoots(benchmark::State& state) {
    const auto degree = static_cast<int>(state.range(0));
    std::vector<double> coeffs{1.0};
    for (int k = 0; k < degree; ++k) {
        const double r = -1.0 + 2.0 * k / std::max(1, degree - 1);
        const std::vector<double> factor{-r, 1.0};
        coeffs = poly_mul(coeffs, factor);
    }
    for (auto _ : state) benchmark::DoNotOptimize(real_roots(coeffs));
}

}  // namespace

BENCHMARK(BM_LmmseUpdateSolve)->Arg(24)->Arg(168);
BENCHMARK(BM_SolveSpd)->Arg(5)->Arg(20)->Arg(24);
BENCHMARK(BM_SymEig)->Arg(5)->Arg(20);
BENCHMARK(BM_RealRoots)->Arg(4)->Arg(10)->Arg(40);
