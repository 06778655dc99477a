// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is 0 only when all criteria pass.

#include "oracles.hpp"

#include "soclearn/analysis.hpp"
#include "soclearn/config.hpp"
#include "soclearn/dynamics.hpp"
#include "soclearn/experiment.hpp"
#include "soclearn/trajectory_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

using namespace soclearn;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const std::vector<std::size_t> kTruthOnly{0};

MarginalLikelihood table1() { return resolve_config("example1").model.signals.marginal(0); }

// Shared Monte Carlo runs for criteria 3, 4, 5 and 11.
struct Sweeps {
    ExperimentConfig short_config, long_config;
    SweepResult short_run, long_run;
    double short_seconds = 0.0;
};

const Sweeps& sweeps() {
    static const Sweeps s = [] {
        auto short_config = resolve_config("example1");
        auto start = std::chrono::steady_clock::now();
        auto short_run = run_experiment(short_config);
        const double short_seconds = seconds_since(start);
        auto long_config = resolve_config("example1_learning");
        auto long_run = run_experiment(long_config);
        return Sweeps{std::move(short_config), std::move(long_config), std::move(short_run), std::move(long_run),
                      short_seconds};
    }();
    return s;
}

double fraction(const SweepResult& r, const char* predicate) {
    auto it = r.aggregates.pass_fraction.find(predicate);
    return it == r.aggregates.pass_fraction.end() ? 0.0 : it->second;
}

Outcome criterion1() {
    auto start = std::chrono::steady_clock::now();
    auto lik = table1();
    auto states = StateSpace::numbered(3);
    auto single = single_revealing_signal(lik, states, kTruthOnly);
    auto lcd_seq = lcd_revealing_sequence(lik, states, kTruthOnly);
    auto minimal = minimal_revealing_sequence(lik, states, kTruthOnly, 5);
    const double secs = seconds_since(start);
    const bool ok = !single.signal && !single.empty_comparison_set && lcd_seq.sequence == std::vector<std::size_t>{0, 1, 1} &&
                    minimal && minimal->length() == 3 && minimal->counts == std::vector<std::size_t>{1, 2} &&
                    secs < 1.0;
    return {ok, "single signal: " + std::string(single.signal ? "found" : "none") +
                    "; LCD sequence " + format_sequence(lik, lcd_seq.sequence) + " (k=" +
                    std::to_string(lcd_seq.length()) + "); minimal k=" +
                    (minimal ? std::to_string(minimal->length()) : std::string("none")) + "; " + num(secs) + " s"};
}

Outcome criterion2() {
    auto lik = table1();
    auto states = StateSpace::numbered(3);
    const std::vector<std::size_t> counts{1, 2};
    auto d = evaluate_delta(lik, states, kTruthOnly, counts);
    const auto& tbl = *lik.rational_table();
    const auto c1 = oracle::delta(tbl, 0, {1}, counts);
    const auto c2 = oracle::delta(tbl, 0, {2}, counts);
    const bool ok = d.exact && *d.exact == Rational(243, 256) && c1 == Rational(243, 256) && c2 == Rational(81, 125) &&
                    *d.exact == std::max(c1, c2);
    return {ok, "delta(H,T,T) = " + (d.exact ? to_string(*d.exact) : std::string("inexact")) + " = max(" +
                    to_string(c1) + ", " + to_string(c2) + ")"};
}

Outcome criterion3() {
    const auto& s = sweeps();
    const double f = fraction(s.short_run, kPredicateForecast);
    return {f >= 0.95 && s.short_seconds < 60.0,
            "forecast TV < 1e-2 at T=2000 in " + num(f) + " of " + std::to_string(s.short_config.seeds.size()) +
                " seeds; sweep took " + num(s.short_seconds) + " s"};
}

Outcome criterion4() {
    const auto& s = sweeps();
    const double f = fraction(s.short_run, kPredicateKStep);
    return {f >= 0.95, "|m(H,T,T) - 4/27| < 1e-2 at T=2000 in " + num(f) + " of seeds"};
}

Outcome criterion5() {
    const auto& s = sweeps();
    const double f_long = fraction(s.long_run, kPredicateLearned);
    const double f_short = fraction(s.short_run, kPredicateLearned);
    return {f_long >= 0.95, "mu(theta*) > 0.99 for all agents in " + num(f_long) + " of seeds at T=" +
                                std::to_string(s.long_config.horizon) + " (" + num(f_short) +
                                " at T=2000; the linear update needs about T=4000 to reach 95%)"};
}

Outcome criterion6() {
    std::vector<std::string> problems;

    // (a) Agent 1 only listens to itself and cannot tell states apart.
    auto cfg = resolve_config("disconnected");
    auto mu = oracle::to_mat(cfg.model.initial.matrix());
    const auto a = oracle::to_mat(cfg.model.network.weights());
    for (int k = 0; k < 5000; ++k) mu = oracle::average(a, mu);
    const double limit = mu[1][0];
    double worst_gap = 0.0, highest = 0.0;
    for (auto seed : cfg.seeds) {
        auto traj = simulate(cfg.model, cfg.horizon, seed, {false, false});
        for (const auto& b : traj.beliefs) {
            worst_gap = std::max(worst_gap, std::abs(b(1, 0) - limit));
            highest = std::max(highest, b(1, 0));
        }
    }
    if (worst_gap > 1e-6 || highest > 0.99) problems.push_back("(a)");

    // (b) No prior mass on the truth.
    auto zero = resolve_config("zero_grain");
    bool all_zero = true;
    for (auto seed : zero.seeds) {
        auto traj = simulate(zero.model, zero.horizon, seed, {false, false});
        for (const auto& b : traj.beliefs)
            for (std::size_t i = 0; i < b.num_agents(); ++i) all_zero = all_zero && b(i, 0) == 0.0;
    }
    if (!all_zero) problems.push_back("(b)");

    // (c) No self-reliance: beliefs follow plain averaging.
    auto selfless = resolve_config("no_self_reliance");
    const auto w = oracle::to_mat(selfless.model.network.weights());
    double worst_avg = 0.0;
    for (auto seed : selfless.seeds) {
        auto traj = simulate(selfless.model, selfless.horizon, seed, {false, false});
        auto ref = oracle::to_mat(selfless.model.initial.matrix());
        for (std::size_t t = 1; t < traj.beliefs.size(); ++t) {
            ref = oracle::average(w, ref);
            for (std::size_t i = 0; i < ref.size(); ++i)
                for (std::size_t th = 0; th < ref[i].size(); ++th)
                    worst_avg = std::max(worst_avg, std::abs(traj.beliefs[t](i, th) - ref[i][th]));
        }
    }
    if (worst_avg > 1e-12) problems.push_back("(c)");

    return {problems.empty(), "(a) max |mu - " + num(limit) + "| = " + num(worst_gap) + ", max mu = " + num(highest) +
                                  " over " + std::to_string(cfg.seeds.size()) + " seeds; (b) truth stays at 0: " +
                                  (all_zero ? "yes" : "no") + "; (c) max deviation from averaging " + num(worst_avg)};
}

Outcome criterion7() {
    auto cfg = resolve_config("indistinguishable");
    std::size_t agreed = 0;
    bool mass_ok = true, split = true;
    double min_mass = 1.0, max_component = 0.0;
    for (auto seed : cfg.seeds) {
        auto traj = simulate(cfg.model, cfg.horizon, seed, {false, false});
        const auto& last = traj.beliefs.back();
        if (consensus_disagreement(last) < 1e-3) ++agreed;
        for (std::size_t i = 0; i < last.num_agents(); ++i) {
            const double mass = last(i, 0) + last(i, 1);
            min_mass = std::min(min_mass, mass);
            max_component = std::max({max_component, last(i, 0), last(i, 1)});
            mass_ok = mass_ok && mass > 0.99;
            split = split && last(i, 0) < 0.99 && last(i, 1) < 0.99;
        }
    }
    const double f = static_cast<double>(agreed) / static_cast<double>(cfg.seeds.size());
    return {f >= 0.95 && mass_ok && split, "consensus < 1e-3 in " + num(f) + " of " +
                                               std::to_string(cfg.seeds.size()) + " seeds; min mu(theta*)+mu(theta1) = " +
                                               num(min_mass) + "; max single component = " + num(max_component)};
}

Outcome criterion8() {
    std::mt19937_64 gen(2024);
    double worst_bayes = 0.0, worst_avg = 0.0;
    const std::size_t horizon = 60;
    for (int k = 0; k < 100; ++k) {
        const std::size_t n = 1 + gen() % 4, m = 2 + gen() % 3;
        std::vector<MarginalLikelihood> informative, flat;
        std::vector<oracle::Mat> lik;
        Matrix beliefs(n, m);
        oracle::Mat mu;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t signals = 2 + gen() % 2;
            oracle::Mat l;
            Matrix t(m, signals);
            for (std::size_t th = 0; th < m; ++th) {
                l.push_back(oracle::random_simplex(gen, signals));
                for (std::size_t s = 0; s < signals; ++s) t(th, s) = l.back()[s];
            }
            lik.push_back(l);
            informative.emplace_back(i, t, MarginalLikelihood::default_alphabet(signals));
            auto common = oracle::random_simplex(gen, signals);
            flat.emplace_back(i, Matrix::from_rows(std::vector<std::vector<double>>(m, common)),
                              MarginalLikelihood::default_alphabet(signals));
            mu.push_back(oracle::random_simplex(gen, m));
            for (std::size_t th = 0; th < m; ++th) beliefs(i, th) = mu.back()[th];
        }
        const auto states = StateSpace::numbered(m);

        ModelBundle isolated{states, SignalModel::independent(informative), Network(Matrix::identity(n)),
                             BeliefProfile(beliefs)};
        auto traj = simulate(isolated, horizon, gen());
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::size_t> seen;
            for (const auto& p : traj.signals) seen.push_back(p.signals[i]);
            auto ref = oracle::bayes_filter(mu[i], lik[i], seen);
            for (std::size_t th = 0; th < m; ++th)
                worst_bayes = std::max(worst_bayes, std::abs(traj.beliefs.back()(i, th) - ref[th]));
        }

        auto a = oracle::random_stochastic(gen, n);
        Matrix weights(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) weights(i, j) = a[i][j];
        ModelBundle blind{states, SignalModel::independent(flat), Network(weights), BeliefProfile(beliefs)};
        auto avg = simulate(blind, horizon, gen());
        auto ref = mu;
        for (std::size_t t = 1; t <= horizon; ++t) {
            ref = oracle::average(a, ref);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t th = 0; th < m; ++th)
                    worst_avg = std::max(worst_avg, std::abs(avg.beliefs[t](i, th) - ref[i][th]));
        }
    }
    return {worst_bayes <= 1e-12 && worst_avg <= 1e-12,
            "100 instances: max deviation from Bayes filter " + num(worst_bayes) + ", from matrix iteration " +
                num(worst_avg)};
}

Outcome criterion9() {
    std::mt19937_64 gen(99);
    double worst_sum = 0.0, worst_square = 0.0;
    bool zeros_kept = true, permutation_exact = true;
    for (int k = 0; k < 1000; ++k) {
        const std::size_t n = 1 + gen() % 4, m = 2 + gen() % 3;
        auto a = oracle::random_stochastic(gen, n, gen() % 4 == 0);
        Matrix weights(n, n), beliefs(n, m);
        std::vector<MarginalLikelihood> liks;
        const std::size_t dead = gen() % m;  // state with no mass anywhere
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) weights(i, j) = a[i][j];
            auto row = oracle::random_simplex(gen, m);
            row[dead] = 0.0;
            double s = std::accumulate(row.begin(), row.end(), 0.0);
            for (std::size_t th = 0; th < m; ++th) beliefs(i, th) = row[th] / s;
            const std::size_t signals = 2 + gen() % 2;
            Matrix t(m, signals);
            for (std::size_t th = 0; th < m; ++th) {
                auto l = oracle::random_simplex(gen, signals);
                for (std::size_t x = 0; x < signals; ++x) t(th, x) = l[x];
            }
            liks.emplace_back(i, t, MarginalLikelihood::default_alphabet(signals));
        }
        SignalProfile obs;
        for (std::size_t i = 0; i < n; ++i) obs.signals.push_back(gen() % liks[i].num_signals());
        UpdateStats stats;
        auto next = update_beliefs(BeliefProfile(beliefs), Network(weights), obs, SignalModel::independent(liks), &stats);
        for (std::size_t i = 0; i < n; ++i) {
            worst_sum = std::max(worst_sum, std::abs(stats.raw_row_sums[i] - 1.0));
            zeros_kept = zeros_kept && next(i, dead) == 0.0;
        }

        const auto& lik = liks[0];
        std::vector<std::size_t> seq(1 + gen() % 6);
        for (auto& x : seq) x = gen() % lik.num_signals();
        const double before = sequence_forecast(beliefs.row(0), lik, seq);
        std::shuffle(seq.begin(), seq.end(), gen);
        permutation_exact = permutation_exact && sequence_forecast(beliefs.row(0), lik, seq) == before;

        std::vector<std::size_t> counts(lik.num_signals(), 0), doubled;
        for (auto x : seq) ++counts[x];
        doubled = counts;
        for (auto& c : doubled) c *= 2;
        const auto states = StateSpace::numbered(m);
        const double d1 = evaluate_delta(lik, states, kTruthOnly, counts).value;
        const double d2 = evaluate_delta(lik, states, kTruthOnly, doubled).value;
        worst_square = std::max(worst_square, std::abs(d2 - d1 * d1) / std::max(1.0, d1 * d1));
    }
    return {worst_sum <= 1e-12 && zeros_kept && permutation_exact && worst_square <= 1e-12,
            "1000 steps: max |row sum - 1| " + num(worst_sum) + "; zeros preserved " + (zeros_kept ? "yes" : "no") +
                "; permutation invariance exact " + (permutation_exact ? "yes" : "no") +
                "; max relative |delta(2x) - delta^2| " + num(worst_square)};
}

Outcome criterion10() {
    bool ok = verify_lcd_optimality(table1(), StateSpace::numbered(3));
    std::mt19937_64 gen(7);
    int verified = 0;
    for (int k = 0; k < 50; ++k) {
        const std::size_t m = 2 + gen() % 3, signals = 2 + gen() % 2;
        RationalTable t;
        while (t.size() < m) {
            auto row = oracle::random_rational_row(gen, signals, 9);
            if (std::find(t.begin(), t.end(), row) == t.end()) t.push_back(row);
        }
        MarginalLikelihood lik(0, t, MarginalLikelihood::default_alphabet(signals));
        if (verify_lcd_optimality(lik, StateSpace::numbered(m))) ++verified;
    }
    ok = ok && verified == 50;

    const std::vector<std::size_t> counts{1, 2};
    const double step = 0.01;
    auto best = simplex_grid_maximum(counts, step);
    const std::vector<double> target{1.0 / 3.0, 2.0 / 3.0};
    auto nearest = nearest_grid_point(target, step);
    auto dist = [&](const std::vector<double>& p) {
        double s = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) s += (p[j] - target[j]) * (p[j] - target[j]);
        return std::sqrt(s);
    };
    const bool grid_ok = dist(best.point) <= dist(nearest) + 1e-9;
    return {ok && grid_ok, "Table 1 plus " + std::to_string(verified) + "/50 random tables optimal; grid maximizer (" +
                               num(best.point[0]) + ", " + num(best.point[1]) + ") vs nearest grid point (" +
                               num(nearest[0]) + ", " + num(nearest[1]) + ")"};
}

Outcome criterion11() {
    std::vector<std::size_t> times;
    std::vector<double> resid;
    const double rate = std::log(0.985);
    for (std::size_t t = 0; t <= 3000; ++t) {
        times.push_back(t);
        resid.push_back(0.8 * std::exp(rate * static_cast<double>(t)));
    }
    auto fit = fit_exponential_rate(times, resid);
    const double err = fit ? std::abs(fit->slope - rate) : INFINITY;

    // Individual paths can stall (the log residual is a random walk with
    // negative drift), so the check is on the cross-seed median.
    const auto& s = sweeps();
    std::vector<double> slopes;
    std::size_t negative = 0;
    double worst_residual = 0.0;
    for (const auto& run : s.long_run.runs)
        for (const auto& r : run.rates) {
            if (!r || !std::isfinite(r->slope)) continue;
            negative += r->slope < 0.0;
            worst_residual = std::max(worst_residual, r->residual);
            slopes.push_back(r->slope);
        }
    std::sort(slopes.begin(), slopes.end());
    const double median = slopes.empty() ? NAN : slopes[slopes.size() / 2];
    return {err < 1e-6 && std::isfinite(median) && median < 0.0,
            "synthetic slope error " + num(err) + "; Example 1 (T=" + std::to_string(s.long_config.horizon) + "): " +
                std::to_string(slopes.size()) + " agent fits, " + std::to_string(negative) + " negative, median slope " +
                num(median) + " per step, max fit RMS residual " + num(worst_residual)};
}

} // namespace

int main() {
    const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                         criterion5, criterion6, criterion7, criterion8,
                                                         criterion9, criterion10, criterion11};
    bool all = true;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::cout << "criterion " << k + 1 << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
    }
    return all ? 0 : 1;
}
