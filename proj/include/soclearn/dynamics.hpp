#pragma once

#include "soclearn/model.hpp"
#include "soclearn/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace soclearn {

// Renormalization accepts |row sum - 1| up to this much; more is a bug.
inline constexpr double kMaxNormalizationDrift = 1e-9;

struct SignalProfile {
    std::vector<std::size_t> signals;  // per agent, index into that agent's alphabet
    friend bool operator==(const SignalProfile&, const SignalProfile&) = default;
};

// Predictive distribution over the agent's signals: sum over states of
// likelihood(s | state) * belief(state).
std::vector<double> one_step_forecast(std::span<const double> belief, const MarginalLikelihood& likelihood);

// Probability assigned to observing `sequence` over the next k steps.
double sequence_forecast(std::span<const double> belief, const MarginalLikelihood& likelihood,
                         std::span<const std::size_t> sequence);

struct UpdateStats {
    std::vector<double> raw_row_sums;  // before renormalization
};

// One synchronous step of the social learning rule: each agent mixes its own
// Bayesian posterior (weight a_ii) with its neighbours' current beliefs.
// Rows are computed independently, in parallel when OpenMP is available.
// Throws ZeroForecastMass (step 0; callers re-stamp) for the lowest offending
// agent with positive self-reliance.
BeliefProfile update_beliefs(const BeliefProfile& beliefs, const Network& network, const SignalProfile& signals,
                             const SignalModel& signal_model, UpdateStats* stats = nullptr);

// Draw of the period-`step` signal profile under the true state.
SignalProfile sample_signals(const SignalModel& signal_model, const StateSpace& states, const CounterRng& rng,
                             std::uint64_t step);

struct ModelBundle {
    StateSpace states;
    SignalModel signals;
    Network network;
    BeliefProfile initial;
};

struct RecordOptions {
    bool forecasts = true;
    bool signals = true;
};

// Time-indexed sample path. beliefs[k] and forecasts[k] are the snapshots at
// time times[k]; signals[k] is the profile observed when moving to times[k+1]
// (so signals is one shorter than beliefs). A full in-memory run has
// times = 0..horizon.
struct Trajectory {
    std::size_t horizon = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> times;
    std::vector<BeliefProfile> beliefs;
    std::vector<SignalProfile> signals;
    std::vector<std::vector<std::vector<double>>> forecasts;  // [snapshot][agent][signal]
};

// Runs `horizon` steps of sample-then-update from the initial beliefs.
// Propagates ZeroForecastMass stamped with the step being computed (t+1).
Trajectory simulate(const ModelBundle& model, std::size_t horizon, std::uint64_t seed,
                    const RecordOptions& options = {});

namespace serial {

// Reference implementation of update_beliefs: one agent at a time, no OpenMP.
BeliefProfile update_beliefs(const BeliefProfile& beliefs, const Network& network, const SignalProfile& signals,
                             const SignalModel& signal_model, UpdateStats* stats = nullptr);

} // namespace serial

} // namespace soclearn
