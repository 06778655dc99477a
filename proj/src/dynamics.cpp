#include "soclearn/dynamics.hpp"

#include "soclearn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>


namespace soclearn {

namespace {

// Rows below this count are not worth a parallel region.
constexpr std::size_t kParallelAgents = 64;

constexpr std::uint64_t kJointStream = std::numeric_limits<std::uint64_t>::max();

void check_shapes(const BeliefProfile& beliefs, const Network& network, const SignalProfile& signals,
                  const SignalModel& model) {
    const std::size_t n = network.size();
    if (beliefs.num_agents() != n || signals.signals.size() != n || model.num_agents() != n) {
        throw DimensionMismatch("update_beliefs: agent counts differ");
    }
    if (beliefs.num_states() != model.num_states()) {
        throw DimensionMismatch("update_beliefs: state counts differ");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (signals.signals[i] >= model.marginal(i).num_signals()) {
            throw DimensionMismatch("update_beliefs: signal of agent " + std::to_string(i) + " out of range");
        }
    }
}

enum class RowStatus : unsigned char { ok, zero_mass, drift };

// Writes the updated, renormalized belief row of agent i into `out` and
// returns the raw (pre-normalization) row sum.
RowStatus update_row(std::size_t i, const Matrix& mu, const Network& network, std::size_t signal,
                     const MarginalLikelihood& likelihood, std::span<double> out, double& raw_sum) {
    const std::size_t states = mu.cols();
    const double self = network.self_reliance(i);
    const auto own = mu.row(i);

    double forecast = 0.0;
    for (std::size_t theta = 0; theta < states; ++theta) forecast += likelihood.prob(theta, signal) * own[theta];

    if (self > 0.0) {
        if (!(forecast > 0.0)) return RowStatus::zero_mass;
        for (std::size_t theta = 0; theta < states; ++theta) {
            out[theta] = self * own[theta] * likelihood.prob(theta, signal) / forecast;
        }
    } else {
        std::fill(out.begin(), out.end(), 0.0);
    }
    for (auto j : network.neighbors(i)) {
        const double a = network.weight(i, j);
        const auto other = mu.row(j);
        for (std::size_t theta = 0; theta < states; ++theta) out[theta] += a * other[theta];
    }

    raw_sum = std::accumulate(out.begin(), out.end(), 0.0);
    if (!(std::abs(raw_sum - 1.0) <= kMaxNormalizationDrift)) return RowStatus::drift;
    // Division can overshoot 1 by an ulp when one state holds all the mass.
    for (auto& v : out) v = std::min(v / raw_sum, 1.0);
    return RowStatus::ok;
}

void raise_first(const std::vector<RowStatus>& status, const std::vector<double>& sums, const SignalProfile& signals) {
    for (std::size_t i = 0; i < status.size(); ++i) {
        if (status[i] == RowStatus::zero_mass) throw ZeroForecastMass(i, signals.signals[i], 0);
        if (status[i] == RowStatus::drift) throw NormalizationDrift(i, sums[i]);
    }
}

std::size_t inverse_cdf(std::span<const double> probs, double u) {
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t s = 0; s < probs.size(); ++s) {
        if (probs[s] > 0.0) last_positive = s;
        cumulative += probs[s];
        if (u < cumulative) return s;
    }
    return last_positive;
}

} // namespace

std::vector<double> one_step_forecast(std::span<const double> belief, const MarginalLikelihood& likelihood) {
    if (belief.size() != likelihood.num_states()) throw DimensionMismatch("one_step_forecast: state count");
    std::vector<double> m(likelihood.num_signals(), 0.0);
    for (std::size_t s = 0; s < m.size(); ++s)
        for (std::size_t theta = 0; theta < belief.size(); ++theta) m[s] += likelihood.prob(theta, s) * belief[theta];
    return m;
}

double sequence_forecast(std::span<const double> belief, const MarginalLikelihood& likelihood,
                         std::span<const std::size_t> sequence) {
    if (belief.size() != likelihood.num_states()) throw DimensionMismatch("sequence_forecast: state count");
    if (sequence.empty()) throw DimensionMismatch("sequence_forecast: empty sequence");
    // Count-based product keeps the value independent of sequence order.
    std::vector<std::size_t> counts(likelihood.num_signals(), 0);
    for (auto s : sequence) {
        if (s >= counts.size()) throw DimensionMismatch("sequence_forecast: signal out of range");
        ++counts[s];
    }
    double total = 0.0;
    for (std::size_t theta = 0; theta < belief.size(); ++theta) {
        double product = 1.0;
        for (std::size_t s = 0; s < counts.size(); ++s) {
            for (std::size_t c = 0; c < counts[s]; ++c) product *= likelihood.prob(theta, s);
        }
        total += belief[theta] * product;
    }
    return total;
}

BeliefProfile update_beliefs(const BeliefProfile& beliefs, const Network& network, const SignalProfile& signals,
                             const SignalModel& signal_model, UpdateStats* stats) {
    check_shapes(beliefs, network, signals, signal_model);
    const std::size_t n = network.size();
    const auto& mu = beliefs.matrix();
    Matrix next(n, mu.cols());
    std::vector<RowStatus> status(n, RowStatus::ok);
    std::vector<double> sums(n, 0.0);

    const auto agents = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelAgents)
    for (std::ptrdiff_t i = 0; i < agents; ++i) {
        const auto a = static_cast<std::size_t>(i);
        status[a] = update_row(a, mu, network, signals.signals[a], signal_model.marginal(a), next.row(a), sums[a]);
    }

    raise_first(status, sums, signals);
    if (stats) stats->raw_row_sums = std::move(sums);
    return BeliefProfile(std::move(next));
}

namespace serial {

BeliefProfile update_beliefs(const BeliefProfile& beliefs, const Network& network, const SignalProfile& signals,
                             const SignalModel& signal_model, UpdateStats* stats) {
    check_shapes(beliefs, network, signals, signal_model);
    const std::size_t n = network.size();
    const auto& mu = beliefs.matrix();
    Matrix next(n, mu.cols());
    std::vector<double> sums(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto status = update_row(i, mu, network, signals.signals[i], signal_model.marginal(i), next.row(i), sums[i]);
        if (status == RowStatus::zero_mass) throw ZeroForecastMass(i, signals.signals[i], 0);
        if (status == RowStatus::drift) throw NormalizationDrift(i, sums[i]);
    }
    if (stats) stats->raw_row_sums = std::move(sums);
    return BeliefProfile(std::move(next));
}

} // namespace serial

SignalProfile sample_signals(const SignalModel& signal_model, const StateSpace& states, const CounterRng& rng,
                             std::uint64_t step) {
    const std::size_t truth = states.true_state();
    if (signal_model.num_states() != states.size()) throw DimensionMismatch("sample_signals: state count");
    SignalProfile profile;
    if (signal_model.mode() == SamplingMode::joint) {
        const auto& joint = *signal_model.joint();
        std::size_t p = inverse_cdf(joint.table().row(truth), rng.uniform(step, kJointStream));
        profile.signals = joint.decode(p);
        return profile;
    }
    profile.signals.resize(signal_model.num_agents());
    for (std::size_t i = 0; i < signal_model.num_agents(); ++i) {
        profile.signals[i] = inverse_cdf(signal_model.marginal(i).row(truth), rng.uniform(step, i));
    }
    return profile;
}

Trajectory simulate(const ModelBundle& model, std::size_t horizon, std::uint64_t seed, const RecordOptions& options) {
    // Dimension checks only; violated assumptions are legitimate experiments.
    (void)check_assumptions(model.network, model.initial, model.signals, model.states);

    const CounterRng rng(seed);
    const std::size_t n = model.network.size();
    Trajectory traj;
    traj.horizon = horizon;
    traj.seed = seed;
    traj.times.reserve(horizon + 1);
    traj.beliefs.reserve(horizon + 1);

    auto record_forecasts = [&](const BeliefProfile& b) {
        if (!options.forecasts) return;
        std::vector<std::vector<double>> f(n);
        for (std::size_t i = 0; i < n; ++i) f[i] = one_step_forecast(b.row(i), model.signals.marginal(i));
        traj.forecasts.push_back(std::move(f));
    };

    traj.times.push_back(0);
    traj.beliefs.push_back(model.initial);
    record_forecasts(model.initial);

    for (std::size_t t = 0; t < horizon; ++t) {
        auto signals = sample_signals(model.signals, model.states, rng, t + 1);
        try {
            traj.beliefs.push_back(update_beliefs(traj.beliefs.back(), model.network, signals, model.signals));
        } catch (const ZeroForecastMass& e) {
            throw e.with_step(t + 1);
        }
        traj.times.push_back(t + 1);
        if (options.signals) traj.signals.push_back(std::move(signals));
        record_forecasts(traj.beliefs.back());
    }
    return traj;
}

} // namespace soclearn
