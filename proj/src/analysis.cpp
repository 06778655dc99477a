#include "soclearn/analysis.hpp"

#include "soclearn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace soclearn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Ratios whose float estimate is this far above 1 are not worth an exact check.
constexpr double kScreenSlack = 1e-9;
constexpr std::size_t kMaxSequenceLength = 10'000'000;

// Per-state likelihood ratios against the true state, shared by every
// frequency-vector evaluation for one agent.
struct RatioTable {
    std::vector<std::size_t> comparison;
    std::vector<std::vector<double>> log_ratio;             // [comparison][signal]
    std::optional<std::vector<std::vector<Rational>>> exact; // [comparison][signal]
    std::vector<char> impossible;                            // signal has zero probability under the truth
};

RatioTable make_ratio_table(const MarginalLikelihood& lik, const StateSpace& states,
                            std::span<const std::size_t> equivalence_set) {
    if (lik.num_states() != states.size()) throw DimensionMismatch("likelihood vs state space");
    const std::size_t truth = states.true_state();
    const std::size_t m = lik.num_signals();
    RatioTable table;
    table.comparison = comparison_states(states, equivalence_set);
    table.impossible.resize(m);
    for (std::size_t s = 0; s < m; ++s) table.impossible[s] = !(lik.prob(truth, s) > 0.0);
    if (lik.is_exact()) table.exact.emplace();
    for (auto theta : table.comparison) {
        std::vector<double> logs(m, 0.0);
        std::vector<Rational> ratios;
        for (std::size_t s = 0; s < m; ++s) {
            if (table.impossible[s]) {
                logs[s] = kInf;
                if (table.exact) ratios.emplace_back(0);
                continue;
            }
            const double p = lik.prob(theta, s);
            logs[s] = p > 0.0 ? std::log(p) - std::log(lik.prob(truth, s)) : -kInf;
            if (table.exact) {
                const auto& rt = *lik.rational_table();
                ratios.push_back(rt[theta][s] / rt[truth][s]);
            }
        }
        table.log_ratio.push_back(std::move(logs));
        if (table.exact) table.exact->push_back(std::move(ratios));
    }
    return table;
}

bool uses_impossible(const RatioTable& table, std::span<const std::size_t> counts) {
    for (std::size_t s = 0; s < counts.size(); ++s)
        if (counts[s] > 0 && table.impossible[s]) return true;
    return false;
}

double log_delta(const RatioTable& table, std::span<const std::size_t> counts) {
    double worst = -kInf;
    for (const auto& logs : table.log_ratio) {
        double total = 0.0;
        for (std::size_t s = 0; s < counts.size(); ++s)
            if (counts[s] > 0) total += static_cast<double>(counts[s]) * logs[s];
        worst = std::max(worst, total);
    }
    return worst;
}

Rational exact_delta(const RatioTable& table, std::span<const std::size_t> counts) {
    std::optional<Rational> worst;
    for (const auto& ratios : *table.exact) {
        Rational product = 1;
        for (std::size_t s = 0; s < counts.size() && product != 0; ++s)
            if (counts[s] > 0) product *= pow(ratios[s], counts[s]);
        if (!worst || product > *worst) worst = product;
    }
    return *worst;
}

Delta full_delta(const RatioTable& table, std::span<const std::size_t> counts) {
    Delta d;
    if (uses_impossible(table, counts)) {
        d.value = kInf;
        d.log_value = kInf;
        return d;
    }
    d.log_value = log_delta(table, counts);
    if (table.exact) {
        d.exact = exact_delta(table, counts);
        d.value = to_double(*d.exact);
    } else {
        d.value = std::exp(d.log_value);
    }
    return d;
}

// Delta if the frequency vector is revealing, nullopt otherwise. Skips the
// exact products when the float estimate is clearly above 1.
std::optional<Delta> revealing_delta(const RatioTable& table, std::span<const std::size_t> counts) {
    if (uses_impossible(table, counts)) return std::nullopt;
    const double lv = log_delta(table, counts);
    if (table.exact && lv > kScreenSlack) return std::nullopt;
    if (!table.exact && !(lv < std::log1p(-kRevealMargin))) return std::nullopt;
    Delta d = full_delta(table, counts);
    if (!d.revealing()) return std::nullopt;
    return d;
}

// Strict ordering used for tie-breaking: smaller delta first.
bool less_delta(const Delta& a, const Delta& b) {
    if (a.exact && b.exact) return *a.exact < *b.exact;
    return a.log_value < b.log_value;
}

std::vector<std::size_t> materialize(std::span<const std::size_t> counts) {
    std::vector<std::size_t> seq;
    for (std::size_t s = 0; s < counts.size(); ++s) seq.insert(seq.end(), counts[s], s);
    return seq;
}

// Compositions of k into `parts` non-negative parts, in ascending lexicographic order.
std::vector<std::vector<std::size_t>> compositions(std::size_t k, std::size_t parts) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> current(parts, 0);
    auto rec = [&](auto&& self, std::size_t idx, std::size_t remaining) -> void {
        if (idx + 1 == parts) {
            current[idx] = remaining;
            out.push_back(current);
            return;
        }
        for (std::size_t c = 0; c <= remaining; ++c) {
            current[idx] = c;
            self(self, idx + 1, remaining - c);
        }
    };
    rec(rec, 0, k);
    return out;
}

struct Best {
    std::vector<std::size_t> counts;
    Delta delta;
};

// Keeps the first minimum in enumeration order, i.e. lexicographic tie-break.
void consider(std::optional<Best>& best, const std::vector<std::size_t>& counts, const Delta& d) {
    if (!best || less_delta(d, best->delta)) best = Best{counts, d};
}

RevealingSequence make_sequence(std::size_t agent, std::vector<std::size_t> counts, Delta delta,
                                RevealMethod method) {
    RevealingSequence out;
    out.agent = agent;
    out.sequence = materialize(counts);
    out.counts = std::move(counts);
    out.delta = std::move(delta);
    out.method = method;
    return out;
}

// Rational version of the true-state row; approximated and renormalized when inexact.
std::vector<Rational> rational_true_row(const MarginalLikelihood& lik, std::size_t truth, std::int64_t max_den) {
    std::vector<Rational> row;
    if (lik.is_exact()) return (*lik.rational_table())[truth];
    Rational total = 0;
    for (double p : lik.row(truth)) {
        row.push_back(best_rational_approximation(p, max_den));
        total += row.back();
    }
    if (total == 0) throw NotRevealing("rational approximation of the true-state row is all zero");
    for (auto& r : row) r /= total;
    return row;
}

std::vector<std::size_t> lcd_counts(const std::vector<Rational>& row) {
    BigInt denom = lcd(row);
    if (denom > kMaxSequenceLength) {
        throw Error("SequenceTooLong", "LCD " + denom.str() + " exceeds the materialization limit; lower max_denominator");
    }
    std::vector<std::size_t> counts;
    for (const auto& r : row) {
        Rational c = r * Rational(denom);
        counts.push_back(numerator(c).convert_to<std::size_t>());
    }
    return counts;
}

} // namespace

bool Delta::revealing() const {
    if (exact) return *exact < 1;
    return log_value < std::log1p(-kRevealMargin);
}

std::vector<std::size_t> comparison_states(const StateSpace& states, std::span<const std::size_t> equivalence_set) {
    std::vector<std::size_t> out;
    for (std::size_t theta = 0; theta < states.size(); ++theta) {
        if (theta == states.true_state()) continue;
        if (std::find(equivalence_set.begin(), equivalence_set.end(), theta) != equivalence_set.end()) continue;
        out.push_back(theta);
    }
    return out;
}

Delta evaluate_delta(const MarginalLikelihood& likelihood, const StateSpace& states,
                     std::span<const std::size_t> equivalence_set, std::span<const std::size_t> counts) {
    if (counts.size() != likelihood.num_signals()) throw DimensionMismatch("evaluate_delta: counts length");
    auto table = make_ratio_table(likelihood, states, equivalence_set);
    if (table.comparison.empty()) throw EmptyComparisonSet(likelihood.agent());
    return full_delta(table, counts);
}

SingleSignalResult single_revealing_signal(const MarginalLikelihood& likelihood, const StateSpace& states,
                                           std::span<const std::size_t> equivalence_set) {
    SingleSignalResult result;
    auto table = make_ratio_table(likelihood, states, equivalence_set);
    if (table.comparison.empty()) {
        result.empty_comparison_set = true;
        return result;
    }
    std::vector<std::size_t> counts(likelihood.num_signals(), 0);
    for (std::size_t s = 0; s < counts.size(); ++s) {
        counts[s] = 1;
        if (auto d = revealing_delta(table, counts); d && (!result.delta || less_delta(*d, *result.delta))) {
            result.signal = s;
            result.delta = std::move(d);
        }
        counts[s] = 0;
    }
    return result;
}

RevealingSequence lcd_revealing_sequence(const MarginalLikelihood& likelihood, const StateSpace& states,
                                         std::span<const std::size_t> equivalence_set, std::int64_t max_denominator) {
    auto table = make_ratio_table(likelihood, states, equivalence_set);
    if (table.comparison.empty()) throw EmptyComparisonSet(likelihood.agent());
    auto counts = lcd_counts(rational_true_row(likelihood, states.true_state(), max_denominator));
    // Delta is always judged on the true table, never on the approximation.
    Delta d = full_delta(table, counts);
    if (!d.revealing()) {
        throw NotRevealing("LCD sequence of length " +
                           std::to_string(std::accumulate(counts.begin(), counts.end(), std::size_t{0})) +
                           " is not revealing (delta " + std::to_string(d.value) +
                           "); increase max_denominator");
    }
    return make_sequence(likelihood.agent(), std::move(counts), std::move(d), RevealMethod::lcd);
}

std::optional<RevealingSequence> minimal_revealing_sequence(const MarginalLikelihood& likelihood,
                                                            const StateSpace& states,
                                                            std::span<const std::size_t> equivalence_set,
                                                            std::size_t k_max) {
    auto table = make_ratio_table(likelihood, states, equivalence_set);
    if (table.comparison.empty()) return std::nullopt;
    const std::size_t m = likelihood.num_signals();
    for (std::size_t k = 1; k <= k_max; ++k) {
        const auto candidates = compositions(k, m);
        std::vector<std::optional<Delta>> deltas(candidates.size());
        const auto count = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t c = 0; c < count; ++c) {
            deltas[static_cast<std::size_t>(c)] = revealing_delta(table, candidates[static_cast<std::size_t>(c)]);
        }
        // Ordered reduction: identical to the serial scan regardless of thread count.
        std::optional<Best> best;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (deltas[c]) consider(best, candidates[c], *deltas[c]);
        }
        if (best) return make_sequence(likelihood.agent(), best->counts, best->delta, RevealMethod::brute_force);
    }
    return std::nullopt;
}

namespace serial {

std::optional<RevealingSequence> minimal_revealing_sequence(const MarginalLikelihood& likelihood,
                                                            const StateSpace& states,
                                                            std::span<const std::size_t> equivalence_set,
                                                            std::size_t k_max) {
    auto table = make_ratio_table(likelihood, states, equivalence_set);
    if (table.comparison.empty()) return std::nullopt;
    for (std::size_t k = 1; k <= k_max; ++k) {
        std::optional<Best> best;
        for (const auto& counts : compositions(k, likelihood.num_signals())) {
            if (auto d = revealing_delta(table, counts)) consider(best, counts, *d);
        }
        if (best) return make_sequence(likelihood.agent(), best->counts, best->delta, RevealMethod::brute_force);
    }
    return std::nullopt;
}

} // namespace serial

std::size_t default_k_max(const MarginalLikelihood& likelihood, const StateSpace& states) {
    if (!likelihood.is_exact()) return kDefaultKMax;
    BigInt bound = lcd((*likelihood.rational_table())[states.true_state()]) * 4;
    return bound < kDefaultKMax ? bound.convert_to<std::size_t>() : kDefaultKMax;
}

bool verify_lcd_optimality(const MarginalLikelihood& likelihood, const StateSpace& states) {
    const std::size_t truth = states.true_state();
    const auto truth_row = rational_true_row(likelihood, truth, kDefaultMaxDenominator);
    const auto counts = lcd_counts(truth_row);

    auto score = [&](const std::vector<Rational>& row) {
        Rational product = 1;
        for (std::size_t s = 0; s < counts.size(); ++s)
            if (counts[s] > 0) product *= pow(row[s], counts[s]);
        return product;
    };
    auto row_of = [&](std::size_t theta) {
        if (likelihood.is_exact()) return (*likelihood.rational_table())[theta];
        std::vector<Rational> row;
        for (double p : likelihood.row(theta)) row.push_back(best_rational_approximation(p, kDefaultMaxDenominator));
        return row;
    };

    const Rational best = score(truth_row);
    for (std::size_t theta = 0; theta < likelihood.num_states(); ++theta) {
        auto row = row_of(theta);
        if (row == truth_row) continue;
        if (!(score(row) < best)) return false;
    }
    return true;
}

GridMaximum simplex_grid_maximum(std::span<const std::size_t> counts, double step) {
    if (counts.size() < 2 || counts.size() > 3) throw DimensionMismatch("grid check supports 2 or 3 signals");
    const auto steps = static_cast<std::size_t>(std::llround(1.0 / step));
    auto objective = [&](const std::vector<double>& p) {
        double v = 1.0;
        for (std::size_t j = 0; j < p.size(); ++j) v *= std::pow(p[j], static_cast<double>(counts[j]));
        return v;
    };
    GridMaximum best;
    best.value = -1.0;
    auto visit = [&](std::vector<double> p) {
        double v = objective(p);
        if (v > best.value) best = GridMaximum{std::move(p), v};
    };
    for (std::size_t i = 0; i <= steps; ++i) {
        const double p0 = static_cast<double>(i) / static_cast<double>(steps);
        if (counts.size() == 2) {
            visit({p0, 1.0 - p0});
            continue;
        }
        for (std::size_t j = 0; i + j <= steps; ++j) {
            const double p1 = static_cast<double>(j) / static_cast<double>(steps);
            visit({p0, p1, static_cast<double>(steps - i - j) / static_cast<double>(steps)});
        }
    }
    return best;
}

std::vector<double> nearest_grid_point(std::span<const double> target, double step) {
    if (target.size() < 2 || target.size() > 3) throw DimensionMismatch("grid check supports 2 or 3 signals");
    const auto steps = static_cast<std::size_t>(std::llround(1.0 / step));
    std::vector<double> best;
    double best_dist = kInf;
    auto visit = [&](std::vector<double> p) {
        double d = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) d += (p[j] - target[j]) * (p[j] - target[j]);
        if (d < best_dist) {
            best_dist = d;
            best = std::move(p);
        }
    };
    for (std::size_t i = 0; i <= steps; ++i) {
        const double p0 = static_cast<double>(i) / static_cast<double>(steps);
        if (target.size() == 2) {
            visit({p0, 1.0 - p0});
            continue;
        }
        for (std::size_t j = 0; i + j <= steps; ++j) {
            const double p1 = static_cast<double>(j) / static_cast<double>(steps);
            visit({p0, p1, static_cast<double>(steps - i - j) / static_cast<double>(steps)});
        }
    }
    return best;
}

// ---------------------------------------------------------------- metrics

double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw DimensionMismatch("total_variation: sizes differ");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - q[i]);
    return std::min(0.5 * total, 1.0);
}

double consensus_disagreement(const BeliefProfile& beliefs) {
    double worst = 0.0;
    for (std::size_t i = 0; i < beliefs.num_agents(); ++i)
        for (std::size_t j = i + 1; j < beliefs.num_agents(); ++j)
            for (std::size_t theta = 0; theta < beliefs.num_states(); ++theta)
                worst = std::max(worst, std::abs(beliefs(i, theta) - beliefs(j, theta)));
    return worst;
}

std::optional<RateFit> fit_exponential_rate(std::span<const std::size_t> times, std::span<const double> residual) {
    if (times.size() != residual.size()) throw DimensionMismatch("fit_exponential_rate: sizes differ");
    auto qualifies = [&](std::size_t k) { return residual[k] > 1e-12 && residual[k] < 1e-1; };
    std::size_t end = residual.size();
    while (end > 0 && !qualifies(end - 1)) --end;
    std::size_t begin = end;
    while (begin > 0 && qualifies(begin - 1)) --begin;
    const std::size_t count = end - begin;
    if (count < 10) return std::nullopt;

    double mean_t = 0.0, mean_y = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
        mean_t += static_cast<double>(times[k]);
        mean_y += std::log(residual[k]);
    }
    mean_t /= static_cast<double>(count);
    mean_y /= static_cast<double>(count);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
        const double dt = static_cast<double>(times[k]) - mean_t;
        sxx += dt * dt;
        sxy += dt * (std::log(residual[k]) - mean_y);
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_t;
    double sse = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
        const double e = std::log(residual[k]) - (fit.intercept + fit.slope * static_cast<double>(times[k]));
        sse += e * e;
    }
    fit.residual = std::sqrt(sse / static_cast<double>(count));
    fit.points = count;
    fit.first_time = times[begin];
    fit.last_time = times[end - 1];
    return fit;
}

ConvergenceReport compute_metrics(const Trajectory& trajectory, const SignalModel& signal_model,
                                  const StateSpace& states,
                                  const std::vector<std::vector<std::vector<std::size_t>>>& watch_sequences) {
    const std::size_t n = signal_model.num_agents();
    const std::size_t snapshots = trajectory.beliefs.size();
    const std::size_t truth = states.true_state();
    if (trajectory.times.size() != snapshots) throw DimensionMismatch("trajectory times vs belief snapshots");
    if (!watch_sequences.empty() && watch_sequences.size() != n) {
        throw DimensionMismatch("watch sequences must be given per agent");
    }

    ConvergenceReport report;
    report.times = trajectory.times;
    report.watch_sequences = watch_sequences;
    report.watch_sequences.resize(n);
    report.agents.resize(n);
    report.consensus.reserve(snapshots);

    for (std::size_t i = 0; i < n; ++i) {
        const auto& lik = signal_model.marginal(i);
        auto& a = report.agents[i];
        const auto& watch = report.watch_sequences[i];
        std::vector<double> targets;
        for (const auto& seq : watch) {
            std::vector<double> point(states.size(), 0.0);
            point[truth] = 1.0;
            targets.push_back(sequence_forecast(point, lik, seq));
        }
        a.kstep_error.assign(watch.size(), {});
        for (std::size_t k = 0; k < snapshots; ++k) {
            const auto belief = trajectory.beliefs[k].row(i);
            const bool have_forecast = k < trajectory.forecasts.size() && trajectory.forecasts[k].size() == n;
            const auto forecast = have_forecast ? trajectory.forecasts[k][i] : one_step_forecast(belief, lik);
            a.forecast_tv.push_back(total_variation(forecast, lik.row(truth)));
            a.belief_true.push_back(belief[truth]);
            double rest = 0.0;
            for (std::size_t theta = 0; theta < belief.size(); ++theta)
                if (theta != truth) rest += belief[theta];
            a.residual_mass.push_back(rest);
            for (std::size_t w = 0; w < watch.size(); ++w) {
                a.kstep_error[w].push_back(std::abs(sequence_forecast(belief, lik, watch[w]) - targets[w]));
            }
        }
        a.rate = fit_exponential_rate(report.times, a.residual_mass);
    }
    for (const auto& b : trajectory.beliefs) report.consensus.push_back(consensus_disagreement(b));
    return report;
}

std::optional<std::size_t> detect_convergence(std::span<const double> series, double epsilon, std::size_t window) {
    if (!(epsilon > 0.0) || window == 0) throw std::invalid_argument("detect_convergence: epsilon > 0 and window >= 1");
    std::size_t run = 0;
    for (std::size_t t = 0; t < series.size(); ++t) {
        run = series[t] < epsilon ? run + 1 : 0;
        if (run == window) return t + 1 - window;
    }
    return std::nullopt;
}

std::string format_sequence(const MarginalLikelihood& likelihood, std::span<const std::size_t> sequence,
                            const std::string& separator) {
    std::string out;
    for (std::size_t k = 0; k < sequence.size(); ++k) {
        if (k > 0) out += separator;
        out += likelihood.alphabet().at(sequence[k]);
    }
    return out;
}

} // namespace soclearn
