#pragma once

#include "soclearn/dynamics.hpp"
#include "soclearn/model.hpp"
#include "soclearn/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace soclearn {

inline constexpr std::int64_t kDefaultMaxDenominator = 1'000'000;
inline constexpr std::size_t kDefaultKMax = 64;
// Inexact likelihood ratios must clear 1 by this margin to count as revealing.
inline constexpr double kRevealMargin = 1e-12;

// Worst-case likelihood ratio of a signal frequency vector against the states
// outside the equivalence set: max over those states of
// prod_s (l(s|theta) / l(s|theta*))^count(s).
struct Delta {
    double value = 0.0;
    double log_value = 0.0;           // stays finite when value underflows
    std::optional<Rational> exact;    // present for rational tables
    bool revealing() const;           // strictly below 1 (exactly, or by kRevealMargin)
};

enum class RevealMethod { lcd, brute_force };

struct RevealingSequence {
    std::size_t agent = 0;
    std::vector<std::size_t> sequence;  // sorted by signal index
    std::vector<std::size_t> counts;    // per signal
    Delta delta;
    RevealMethod method = RevealMethod::lcd;

    std::size_t length() const { return sequence.size(); }
};

struct SingleSignalResult {
    std::optional<std::size_t> signal;
    std::optional<Delta> delta;
    bool empty_comparison_set = false;  // every state is equivalent to the truth
};

// States of `states` not in `equivalence_set`.
std::vector<std::size_t> comparison_states(const StateSpace& states, std::span<const std::size_t> equivalence_set);

// Throws DimensionMismatch if counts has the wrong length; compositions that
// use a signal impossible under the true state yield +inf.
Delta evaluate_delta(const MarginalLikelihood& likelihood, const StateSpace& states,
                     std::span<const std::size_t> equivalence_set, std::span<const std::size_t> counts);

SingleSignalResult single_revealing_signal(const MarginalLikelihood& likelihood, const StateSpace& states,
                                           std::span<const std::size_t> equivalence_set);

// Frequency-matching construction: length is the LCD of the true-state row,
// each signal repeated in proportion to its probability. Inexact rows are first
// replaced by best rational approximations (denominator <= max_denominator).
RevealingSequence lcd_revealing_sequence(const MarginalLikelihood& likelihood, const StateSpace& states,
                                         std::span<const std::size_t> equivalence_set,
                                         std::int64_t max_denominator = kDefaultMaxDenominator);

// Shortest revealing frequency vector by exhaustive search over compositions
// of k = 1..k_max. Ties: smallest delta, then lexicographically smallest counts.
std::optional<RevealingSequence> minimal_revealing_sequence(const MarginalLikelihood& likelihood,
                                                            const StateSpace& states,
                                                            std::span<const std::size_t> equivalence_set,
                                                            std::size_t k_max = kDefaultKMax);

// min(4 * LCD of the true-state row, 64); 64 for inexact tables.
std::size_t default_k_max(const MarginalLikelihood& likelihood, const StateSpace& states);

// The true-state row maximizes the probability of its LCD sequence among the
// table's rows: every row that differs from it scores strictly lower.
bool verify_lcd_optimality(const MarginalLikelihood& likelihood, const StateSpace& states);

struct GridMaximum {
    std::vector<double> point;
    double value = 0.0;
};

// Maximizes prod_j p_j^counts[j] over the simplex grid with the given step
// (2 <= counts.size() <= 3).
GridMaximum simplex_grid_maximum(std::span<const std::size_t> counts, double step);
// Grid point nearest `target` in Euclidean distance.
std::vector<double> nearest_grid_point(std::span<const double> target, double step);

// ---------------------------------------------------------------- metrics

struct RateFit {
    double slope = 0.0;      // d/dt log(1 - mu(theta*)); log of the per-step contraction
    double intercept = 0.0;
    double residual = 0.0;   // RMS of least-squares residuals
    std::size_t points = 0;
    std::size_t first_time = 0;
    std::size_t last_time = 0;
};

// Least-squares line through (time, log residual) over the last contiguous run
// of points with residual in (1e-12, 1e-1); nullopt with fewer than 10 points.
std::optional<RateFit> fit_exponential_rate(std::span<const std::size_t> times, std::span<const double> residual);

struct AgentMetrics {
    std::vector<double> forecast_tv;                 // TV(m_t, l(.|theta*))
    std::vector<double> belief_true;                 // mu_t(theta*)
    std::vector<double> residual_mass;               // sum over theta != theta* of mu_t(theta)
    std::vector<std::vector<double>> kstep_error;    // per watch sequence
    std::optional<RateFit> rate;
};

struct ConvergenceReport {
    std::vector<std::size_t> times;
    std::vector<AgentMetrics> agents;
    std::vector<double> consensus;  // max over agent pairs of the sup-norm belief gap
    std::vector<std::vector<std::vector<std::size_t>>> watch_sequences;  // [agent][k]
};

double total_variation(std::span<const double> p, std::span<const double> q);
double consensus_disagreement(const BeliefProfile& beliefs);

ConvergenceReport compute_metrics(const Trajectory& trajectory, const SignalModel& signal_model,
                                  const StateSpace& states,
                                  const std::vector<std::vector<std::vector<std::size_t>>>& watch_sequences);

// Smallest index t with series[t .. t+window) all below epsilon.
std::optional<std::size_t> detect_convergence(std::span<const double> series, double epsilon, std::size_t window);

std::string format_sequence(const MarginalLikelihood& likelihood, std::span<const std::size_t> sequence,
                            const std::string& separator = ",");

namespace serial {

std::optional<RevealingSequence> minimal_revealing_sequence(const MarginalLikelihood& likelihood,
                                                            const StateSpace& states,
                                                            std::span<const std::size_t> equivalence_set,
                                                            std::size_t k_max = kDefaultKMax);

} // namespace serial

} // namespace soclearn
