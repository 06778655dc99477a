#include "oracles.hpp"

#include "soclearn/analysis.hpp"
#include "soclearn/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <random>

using namespace soclearn;

namespace {

RationalTable rt(std::initializer_list<std::initializer_list<Rational>> rows) {
    RationalTable t;
    for (const auto& r : rows) t.emplace_back(r);
    return t;
}

MarginalLikelihood table1() {
    return {0, rt({{Rational(1, 3), Rational(2, 3)}, {Rational(1, 4), Rational(3, 4)}, {Rational(3, 5), Rational(2, 5)}}),
            {"H", "T"}};
}

const std::vector<std::size_t> kTruthOnly{0};

// Random rational table with pairwise distinct, strictly positive rows.
MarginalLikelihood random_rational_table(std::mt19937_64& gen, std::size_t states, std::size_t signals) {
    RationalTable t;
    while (t.size() < states) {
        auto row = oracle::random_rational_row(gen, signals, 6);
        if (std::find(t.begin(), t.end(), row) == t.end()) t.push_back(row);
    }
    return {0, t, MarginalLikelihood::default_alphabet(signals)};
}

} // namespace

TEST_CASE("single revealing signal") {
    auto states = StateSpace::numbered(3);
    auto none = single_revealing_signal(table1(), states, kTruthOnly);
    CHECK_FALSE(none.signal);
    CHECK_FALSE(none.empty_comparison_set);

    auto two = StateSpace::numbered(2);
    MarginalLikelihood sharp(0, rt({{Rational(9, 10), Rational(1, 10)}, {Rational(1, 10), Rational(9, 10)}}),
                             {"s0", "s1"});
    auto hit = single_revealing_signal(sharp, two, kTruthOnly);
    REQUIRE(hit.signal);
    CHECK(*hit.signal == 0);
    REQUIRE(hit.delta->exact);
    CHECK(*hit.delta->exact == Rational(1, 9));

    MarginalLikelihood flat(0, rt({{Rational(1, 2), Rational(1, 2)}, {Rational(1, 2), Rational(1, 2)}}), {"a", "b"});
    const std::vector<std::size_t> everything{0, 1};
    auto vacuous = single_revealing_signal(flat, two, everything);
    CHECK(vacuous.empty_comparison_set);
    CHECK_FALSE(vacuous.signal);
}

TEST_CASE("LCD construction") {
    auto states = StateSpace::numbered(3);
    auto seq = lcd_revealing_sequence(table1(), states, kTruthOnly);
    CHECK(seq.sequence == std::vector<std::size_t>{0, 1, 1});
    CHECK(seq.length() == 3);
    REQUIRE(seq.delta.exact);
    CHECK(*seq.delta.exact == Rational(243, 256));
    CHECK(format_sequence(table1(), seq.sequence) == "H,T,T");

    // Component ratios, computed independently.
    const auto tbl = *table1().rational_table();
    CHECK(oracle::delta(tbl, 0, {1}, {1, 2}) == Rational(243, 256));
    CHECK(oracle::delta(tbl, 0, {2}, {1, 2}) == Rational(81, 125));

    auto two = StateSpace::numbered(2);
    MarginalLikelihood half(0, rt({{Rational(1, 2), Rational(1, 2)}, {Rational(1, 4), Rational(3, 4)}}), {"H", "T"});
    auto ht = lcd_revealing_sequence(half, two, kTruthOnly);
    CHECK(ht.sequence == std::vector<std::size_t>{0, 1});
    CHECK(*ht.delta.exact == Rational(3, 4));

    MarginalLikelihood point(0, rt({{Rational(1), Rational(0)}, {Rational(1, 2), Rational(1, 2)},
                                    {Rational(1, 5), Rational(4, 5)}}),
                             {"a", "b"});
    auto one = lcd_revealing_sequence(point, states, kTruthOnly);
    CHECK(one.sequence == std::vector<std::size_t>{0});
    CHECK(*one.delta.exact == Rational(1, 2));

    MarginalLikelihood flat(0, rt({{Rational(1, 2), Rational(1, 2)}, {Rational(1, 2), Rational(1, 2)}}), {"a", "b"});
    const std::vector<std::size_t> everything{0, 1};
    CHECK_THROWS_AS(lcd_revealing_sequence(flat, two, everything), EmptyComparisonSet);
}

TEST_CASE("LCD construction on inexact tables uses rational approximations") {
    auto states = StateSpace::numbered(3);
    MarginalLikelihood real(0, Matrix{{1.0 / 3.0, 2.0 / 3.0}, {0.25, 0.75}, {0.6, 0.4}}, {"H", "T"});
    auto seq = lcd_revealing_sequence(real, states, kTruthOnly);
    CHECK(seq.sequence == std::vector<std::size_t>{0, 1, 1});
    CHECK_FALSE(seq.delta.exact);
    CHECK(seq.delta.value == doctest::Approx(243.0 / 256.0).epsilon(1e-12));
}

TEST_CASE("minimal revealing sequence") {
    auto states = StateSpace::numbered(3);
    auto best = minimal_revealing_sequence(table1(), states, kTruthOnly, 5);
    REQUIRE(best);
    CHECK(best->counts == std::vector<std::size_t>{1, 2});
    CHECK(best->length() == 3);
    CHECK(*best->delta.exact == Rational(243, 256));
    CHECK_FALSE(minimal_revealing_sequence(table1(), states, kTruthOnly, 2));
    CHECK(default_k_max(table1(), states) == 12);

    auto two = StateSpace::numbered(2);
    MarginalLikelihood sharp(0, rt({{Rational(9, 10), Rational(1, 10)}, {Rational(1, 10), Rational(9, 10)}}),
                             {"s0", "s1"});
    auto one = minimal_revealing_sequence(sharp, two, kTruthOnly, 5);
    REQUIRE(one);
    CHECK(one->sequence == std::vector<std::size_t>{0});

    MarginalLikelihood flat(0, rt({{Rational(1, 2), Rational(1, 2)}, {Rational(1, 2), Rational(1, 2)}}), {"a", "b"});
    CHECK_FALSE(minimal_revealing_sequence(flat, two, kTruthOnly, 20));
    const std::vector<std::size_t> everything{0, 1};
    CHECK_FALSE(minimal_revealing_sequence(flat, two, everything, 20));
}

TEST_CASE("brute force agrees with an exhaustive exact search") {
    std::mt19937_64 gen(41);
    for (int k = 0; k < 40; ++k) {
        const std::size_t m = 2 + gen() % 2, signals = 2 + gen() % 2;
        auto lik = random_rational_table(gen, m, signals);
        auto states = StateSpace::numbered(m);
        auto comp = comparison_states(states, kTruthOnly);
        auto found = minimal_revealing_sequence(lik, states, kTruthOnly, 8);

        // Reference: first length with a composition whose exact delta is < 1,
        // smallest delta, ties to the lexicographically smallest counts.
        std::optional<std::pair<Rational, std::vector<std::size_t>>> ref;
        for (std::size_t len = 1; len <= 8 && !ref; ++len) {
            std::vector<std::size_t> c(signals, 0);
            std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t left) {
                if (pos + 1 == signals) {
                    c[pos] = left;
                    auto d = oracle::delta(*lik.rational_table(), 0, comp, c);
                    if (d < 1 && (!ref || d < ref->first || (d == ref->first && c < ref->second))) ref.emplace(d, c);
                    return;
                }
                for (std::size_t x = 0; x <= left; ++x) {
                    c[pos] = x;
                    rec(pos + 1, left - x);
                }
            };
            rec(0, len);
        }
        REQUIRE(found.has_value() == ref.has_value());
        if (ref) {
            CHECK(found->counts == ref->second);
            CHECK(*found->delta.exact == ref->first);
        }
        auto ser = serial::minimal_revealing_sequence(lik, states, kTruthOnly, 8);
        REQUIRE(ser.has_value() == found.has_value());
        if (ser) {
            CHECK(ser->counts == found->counts);
            CHECK(ser->delta.value == found->delta.value);
        }
        // The LCD sequence is revealing, so the minimal one is no longer.
        auto lcd_seq = lcd_revealing_sequence(lik, states, kTruthOnly);
        if (found) CHECK(found->length() <= lcd_seq.length());
    }
}

TEST_CASE("delta of a doubled sequence is delta squared") {
    std::mt19937_64 gen(43);
    for (int k = 0; k < 300; ++k) {
        const std::size_t m = 2 + gen() % 3, signals = 2 + gen() % 2;
        Matrix t(m, signals);
        for (std::size_t th = 0; th < m; ++th) {
            auto row = oracle::random_simplex(gen, signals);
            for (std::size_t s = 0; s < signals; ++s) t(th, s) = row[s];
        }
        MarginalLikelihood lik(0, t, MarginalLikelihood::default_alphabet(signals));
        auto states = StateSpace::numbered(m);
        std::vector<std::size_t> counts(signals);
        for (auto& c : counts) c = gen() % 4;
        auto doubled = counts;
        for (auto& c : doubled) c *= 2;
        const double d1 = evaluate_delta(lik, states, kTruthOnly, counts).value;
        const double d2 = evaluate_delta(lik, states, kTruthOnly, doubled).value;
        CHECK(std::abs(d2 - d1 * d1) <= 1e-12 * std::max(1.0, d1 * d1));
    }
    auto states = StateSpace::numbered(3);
    const std::vector<std::size_t> c1{1, 2}, c2{2, 4};
    CHECK(*evaluate_delta(table1(), states, kTruthOnly, c2).exact ==
          pow(*evaluate_delta(table1(), states, kTruthOnly, c1).exact, 2));
}

TEST_CASE("LCD optimality") {
    auto states = StateSpace::numbered(3);
    CHECK(verify_lcd_optimality(table1(), states));
    std::mt19937_64 gen(47);
    for (int k = 0; k < 50; ++k) {
        const std::size_t m = 2 + gen() % 3, signals = 2 + gen() % 2;
        CHECK(verify_lcd_optimality(random_rational_table(gen, m, signals), StateSpace::numbered(m)));
    }
    MarginalLikelihood dup(0, rt({{Rational(1, 3), Rational(2, 3)}, {Rational(1, 3), Rational(2, 3)}}), {"H", "T"});
    CHECK(verify_lcd_optimality(dup, StateSpace::numbered(2)));
}

TEST_CASE("simplex grid maximum") {
    const std::vector<std::size_t> counts{1, 2};
    auto best = simplex_grid_maximum(counts, 0.01);
    const std::vector<double> target{1.0 / 3.0, 2.0 / 3.0};
    auto nearest = nearest_grid_point(target, 0.01);
    CHECK(best.point[0] == doctest::Approx(nearest[0]));
    CHECK(best.point[1] == doctest::Approx(nearest[1]));
    CHECK(best.value == doctest::Approx(0.33 * 0.67 * 0.67));

    const std::vector<std::size_t> three{1, 1, 2};
    auto b3 = simplex_grid_maximum(three, 0.05);
    CHECK(b3.point[0] == doctest::Approx(0.25));
    CHECK(b3.point[1] == doctest::Approx(0.25));
    CHECK(b3.point[2] == doctest::Approx(0.5));
}

TEST_CASE("convergence detection") {
    const std::vector<double> zeros(20, 0.0);
    CHECK(detect_convergence(zeros, 1e-3, 5) == 0u);
    std::vector<double> inv(30);
    for (std::size_t t = 0; t < inv.size(); ++t) inv[t] = t == 0 ? 1.0 : 1.0 / static_cast<double>(t);
    CHECK(detect_convergence(inv, 0.1, 3) == 11u);
    const std::vector<double> ones(20, 1.0);
    CHECK_FALSE(detect_convergence(ones, 1e-3, 5));
    const std::vector<double> blip{0, 0, 1, 0, 0, 0};
    CHECK(detect_convergence(blip, 0.5, 3) == 3u);
    CHECK_FALSE(detect_convergence(zeros, 1e-3, 21));
    CHECK_THROWS_AS(detect_convergence(zeros, 0.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(detect_convergence(zeros, 1e-3, 0), std::invalid_argument);
}

TEST_CASE("exponential rate fit") {
    std::vector<std::size_t> times;
    std::vector<double> resid;
    const double rate = std::log(0.97);
    for (std::size_t t = 0; t <= 1000; ++t) {
        times.push_back(t);
        resid.push_back(0.5 * std::exp(rate * static_cast<double>(t)));
    }
    auto fit = fit_exponential_rate(times, resid);
    REQUIRE(fit);
    CHECK(std::abs(fit->slope - rate) < 1e-6);
    CHECK(fit->residual < 1e-9);
    CHECK(resid[fit->first_time] < 1e-1);
    CHECK(resid[fit->last_time] > 1e-12);

    const std::vector<double> flat(100, 0.5);
    std::vector<std::size_t> t100(100);
    std::iota(t100.begin(), t100.end(), 0);
    CHECK_FALSE(fit_exponential_rate(t100, flat));
}

TEST_CASE("total variation and consensus") {
    const std::vector<double> p{0.2, 0.8}, q{0.5, 0.5};
    CHECK(total_variation(p, q) == doctest::Approx(0.3));
    CHECK(total_variation(p, p) == 0.0);
    CHECK(consensus_disagreement(BeliefProfile::uniform(3, 2)) == 0.0);
    CHECK(consensus_disagreement(BeliefProfile(Matrix{{0.2, 0.8}, {0.5, 0.5}, {0.3, 0.7}})) == doctest::Approx(0.3));
}

TEST_CASE("metrics of an already-learned trajectory are zero") {
    auto states = StateSpace::numbered(3);
    ModelBundle model{states, SignalModel::independent({table1(), table1().for_agent(1)}),
                      Network(Matrix{{0.5, 0.5}, {0.5, 0.5}}), BeliefProfile::point_mass(2, 3, 0)};
    auto traj = simulate(model, 100, 1);
    std::vector<std::vector<std::vector<std::size_t>>> watch{{{0, 1, 1}}, {{0, 1, 1}}};
    auto report = compute_metrics(traj, model.signals, states, watch);
    REQUIRE(report.times.size() == 101);
    for (const auto& a : report.agents) {
        for (double v : a.forecast_tv) CHECK(v == 0.0);
        for (double v : a.kstep_error[0]) CHECK(v == 0.0);
        for (double v : a.belief_true) CHECK(v == 1.0);
        for (double v : a.residual_mass) CHECK(v == 0.0);
    }
    for (double v : report.consensus) CHECK(v == 0.0);
}

TEST_CASE("averaging dynamics drive disagreement down") {
    auto states = StateSpace::numbered(3);
    MarginalLikelihood flat(0, Matrix{{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}, {"H", "T"});
    ModelBundle model{states, SignalModel::independent({flat, flat.for_agent(1), flat.for_agent(2)}),
                      Network(Matrix{{0.5, 0.5, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}}),
                      BeliefProfile(Matrix{{0.6, 0.2, 0.2}, {0.1, 0.8, 0.1}, {0.3, 0.3, 0.4}})};
    auto traj = simulate(model, 200, 1);
    auto report = compute_metrics(traj, model.signals, states, {});
    CHECK(report.consensus.back() < 1e-9);
    CHECK(report.consensus.back() < report.consensus.front());
    // The consensus value is the left-eigenvector average of the initial column.
    const double limit = (0.6 + 0.1 + 0.3) / 3.0;
    CHECK(report.agents[0].belief_true.back() == doctest::Approx(limit).epsilon(1e-9));
}
