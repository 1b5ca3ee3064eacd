#include "entspan/effective.hpp"
#include "entspan/entanglement.hpp"
#include "entspan/exact.hpp"
#include "entspan/freefermion.hpp"
#include "entspan/rng.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace entspan;

namespace {

ChainModel quadratic_chain(int n, unsigned seed) {
    RngStream rng(seed, 0);
    std::vector<Term> terms;
    for (int l = 0; l + 1 < n; ++l) {
        terms.push_back(two_site(l, Pauli::X, l + 1, Pauli::X, rng.uniform(-1, 1)));
        terms.push_back(two_site(l, Pauli::Y, l + 1, Pauli::Y, rng.uniform(-1, 1)));
    }
    for (int l = 0; l < n; ++l) terms.push_back(single_site(l, Pauli::Z, rng.uniform(-1, 1)));
    return build_general(n, terms);
}

void bm_to_dense(benchmark::State& state) {
    const auto model = quadratic_chain(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(to_dense(model));
}
BENCHMARK(bm_to_dense)->Arg(8)->Arg(10)->Arg(12);

void bm_dense_ground_state(benchmark::State& state) {
    const auto model = quadratic_chain(static_cast<int>(state.range(0)), 2);
    const auto op = to_dense(model);
    for (auto _ : state) benchmark::DoNotOptimize(ground_state_dm(op));
}
BENCHMARK(bm_dense_ground_state)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void bm_freefermion_solve(benchmark::State& state) {
    const auto model = quadratic_chain(static_cast<int>(state.range(0)), 3);
    const auto qm = jordan_wigner(model);
    for (auto _ : state) benchmark::DoNotOptimize(end_to_end_rdm(qm));
}
BENCHMARK(bm_freefermion_solve)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void bm_pfaffian(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937 gen(4);
    std::normal_distribution<double> g;
    Eigen::MatrixXd x(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) x(i, j) = g(gen);
    const Eigen::MatrixXd a = x - x.transpose();
    for (auto _ : state) benchmark::DoNotOptimize(pfaffian(a));
}
BENCHMARK(bm_pfaffian)->Arg(64)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);

void bm_concurrence(benchmark::State& state) {
    std::mt19937 gen(5);
    std::normal_distribution<double> g;
    Eigen::Matrix4cd x;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) x(i, j) = std::complex<double>(g(gen), g(gen));
    Eigen::Matrix4cd rho = x * x.adjoint();
    rho /= rho.trace().real();
    const TwoSpinState state4{rho};
    for (auto _ : state) benchmark::DoNotOptimize(concurrence(state4));
}
BENCHMARK(bm_concurrence);

void bm_discord(benchmark::State& state) {
    std::mt19937 gen(6);
    std::normal_distribution<double> g;
    Eigen::Matrix4cd x;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) x(i, j) = std::complex<double>(g(gen), g(gen));
    Eigen::Matrix4cd rho = x * x.adjoint();
    rho /= rho.trace().real();
    const TwoSpinState state4{rho};
    for (auto _ : state)
        benchmark::DoNotOptimize(discord(state4, static_cast<int>(state.range(0))));
}
BENCHMARK(bm_discord)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void bm_second_order_effective(benchmark::State& state) {
    std::vector<Term> terms = {single_site(1, Pauli::Z, 50.0)};
    for (int i = 0; i < 3; ++i) {
        const auto p = static_cast<Pauli>(i + 1);
        terms.push_back(two_site(0, p, 1, p, 0.3 + 0.1 * i));
        terms.push_back(two_site(1, p, 2, p, 0.4 + 0.1 * i));
    }
    const auto model = build_general(3, terms);
    const std::array<int, 1> mediator = {1};
    for (auto _ : state)
        benchmark::DoNotOptimize(second_order_effective(model, {0, 2}, mediator));
}
BENCHMARK(bm_second_order_effective);

} // namespace

BENCHMARK_MAIN();
