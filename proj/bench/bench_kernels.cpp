// Serial reference vs OpenMP kernels.

#include "soclearn/analysis.hpp"
#include "soclearn/config.hpp"
#include "soclearn/dynamics.hpp"
#include "soclearn/experiment.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace soclearn;

namespace {

struct UpdateCase {
    BeliefProfile beliefs;
    Network network;
    SignalModel signals;
    SignalProfile observed;
};

std::vector<double> simplex(std::mt19937_64& gen, std::size_t m) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v(m);
    double s = 0.0;
    for (auto& x : v) s += (x = e(gen));
    for (auto& x : v) x /= s;
    return v;
}

UpdateCase make_update_case(std::size_t n, std::size_t states, std::size_t signals) {
    std::mt19937_64 gen(1);
    Matrix a(n, n), b(n, states);
    std::vector<MarginalLikelihood> liks;
    SignalProfile obs;
    for (std::size_t i = 0; i < n; ++i) {
        auto row = simplex(gen, n);
        auto mu = simplex(gen, states);
        for (std::size_t j = 0; j < n; ++j) a(i, j) = row[j];
        for (std::size_t th = 0; th < states; ++th) b(i, th) = mu[th];
        Matrix t(states, signals);
        for (std::size_t th = 0; th < states; ++th) {
            auto l = simplex(gen, signals);
            for (std::size_t s = 0; s < signals; ++s) t(th, s) = l[s];
        }
        liks.emplace_back(i, t, MarginalLikelihood::default_alphabet(signals));
        obs.signals.push_back(gen() % signals);
    }
    return {BeliefProfile(b), Network(a), SignalModel::independent(std::move(liks)), obs};
}

template <bool Parallel>
void BM_UpdateBeliefs(benchmark::State& state) {
    auto c = make_update_case(static_cast<std::size_t>(state.range(0)), 8, 4);
    for (auto _ : state) {
        if constexpr (Parallel) {
            benchmark::DoNotOptimize(update_beliefs(c.beliefs, c.network, c.observed, c.signals));
        } else {
            benchmark::DoNotOptimize(serial::update_beliefs(c.beliefs, c.network, c.observed, c.signals));
        }
    }
}

// A table whose shortest revealing sequence is long enough to make the search non-trivial.
MarginalLikelihood search_table() {
    RationalTable t{{Rational(5, 20), Rational(6, 20), Rational(4, 20), Rational(5, 20)},
                    {Rational(6, 20), Rational(5, 20), Rational(4, 20), Rational(5, 20)},
                    {Rational(5, 20), Rational(5, 20), Rational(5, 20), Rational(5, 20)}};
    return {0, t, MarginalLikelihood::default_alphabet(4)};
}

template <bool Parallel>
void BM_MinimalRevealing(benchmark::State& state) {
    auto lik = search_table();
    auto states = StateSpace::numbered(3);
    const std::vector<std::size_t> eq{0};
    const auto k_max = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        if constexpr (Parallel) {
            benchmark::DoNotOptimize(minimal_revealing_sequence(lik, states, eq, k_max));
        } else {
            benchmark::DoNotOptimize(serial::minimal_revealing_sequence(lik, states, eq, k_max));
        }
    }
}

template <bool Parallel>
void BM_Sweep(benchmark::State& state) {
    auto config = resolve_config("example1");
    config.seeds.resize(static_cast<std::size_t>(state.range(0)));
    config.horizon = 500;
    for (auto _ : state) {
        if constexpr (Parallel) {
            benchmark::DoNotOptimize(run_experiment(config));
        } else {
            benchmark::DoNotOptimize(serial::run_experiment(config));
        }
    }
}

} // namespace

BENCHMARK(BM_UpdateBeliefs<false>)->Name("update_beliefs/serial")->Arg(16)->Arg(256)->Arg(1024);
BENCHMARK(BM_UpdateBeliefs<true>)->Name("update_beliefs/openmp")->Arg(16)->Arg(256)->Arg(1024);
BENCHMARK(BM_MinimalRevealing<false>)->Name("minimal_revealing/serial")->Arg(8)->Arg(16);
BENCHMARK(BM_MinimalRevealing<true>)->Name("minimal_revealing/openmp")->Arg(8)->Arg(16);
BENCHMARK(BM_Sweep<false>)->Name("sweep/serial")->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep<true>)->Name("sweep/openmp")->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
