#pragma once

#include "soclearn/matrix.hpp"
#include "soclearn/rational.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace soclearn {

inline constexpr double kRowSumTolerance = 1e-12;

// Finite set of world states with the designated true state.
class StateSpace {
public:
    StateSpace(std::vector<std::string> labels, std::size_t true_state);

    std::size_t size() const { return labels_.size(); }
    std::size_t true_state() const { return true_state_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(std::size_t state) const { return labels_.at(state); }
    std::optional<std::size_t> index_of(const std::string& label) const;

    // Default labels "theta*" for the true state and "theta<k>" for the others.
    static StateSpace numbered(std::size_t count, std::size_t true_state = 0);

private:
    std::vector<std::string> labels_;
    std::size_t true_state_;
};

// Per-agent likelihood table: entry (state, signal) = probability of observing
// the signal in one period when the world is in that state.
class MarginalLikelihood {
public:
    MarginalLikelihood(std::size_t agent, Matrix table, std::vector<std::string> alphabet);
    MarginalLikelihood(std::size_t agent, RationalTable table, std::vector<std::string> alphabet);

    std::size_t agent() const { return agent_; }
    std::size_t num_states() const { return table_.rows(); }
    std::size_t num_signals() const { return table_.cols(); }
    const Matrix& table() const { return table_; }
    const std::vector<std::string>& alphabet() const { return alphabet_; }
    std::optional<std::size_t> signal_index(const std::string& label) const;

    double prob(std::size_t state, std::size_t signal) const { return table_(state, signal); }
    std::span<const double> row(std::size_t state) const { return table_.row(state); }

    bool is_exact() const { return rational_.has_value(); }
    const std::optional<RationalTable>& rational_table() const { return rational_; }

    // Signals that have zero probability under `state`.
    std::vector<std::size_t> zero_signals(std::size_t state) const;
    bool row_positive(std::size_t state) const { return zero_signals(state).empty(); }

    // Keeps only the listed signals (in the given order) and renormalizes nothing:
    // the caller must only drop columns that are zero in every row it cares about.
    MarginalLikelihood restrict_signals(std::span<const std::size_t> keep) const;

    // Same table relabelled as belonging to another agent.
    MarginalLikelihood for_agent(std::size_t agent) const;

    static std::vector<std::string> default_alphabet(std::size_t count);

private:
    void validate() const;

    std::size_t agent_;
    Matrix table_;
    std::vector<std::string> alphabet_;
    std::optional<RationalTable> rational_;
};

// Joint likelihood over signal profiles. Profiles are indexed in mixed radix
// with agent 0 as the most significant digit.
class JointLikelihood {
public:
    JointLikelihood(std::vector<std::size_t> alphabet_sizes, Matrix table);
    JointLikelihood(std::vector<std::size_t> alphabet_sizes, RationalTable table);

    const std::vector<std::size_t>& alphabet_sizes() const { return sizes_; }
    std::size_t num_agents() const { return sizes_.size(); }
    std::size_t num_states() const { return table_.rows(); }
    std::size_t num_profiles() const { return table_.cols(); }
    const Matrix& table() const { return table_; }
    const std::optional<RationalTable>& rational_table() const { return rational_; }

    std::size_t profile_index(std::span<const std::size_t> signals) const;
    std::vector<std::size_t> decode(std::size_t profile) const;

private:
    std::vector<std::size_t> sizes_;
    Matrix table_;
    std::optional<RationalTable> rational_;
};

enum class SamplingMode { independent, joint };

class SignalModel {
public:
    static SignalModel independent(std::vector<MarginalLikelihood> marginals);
    // Derives the marginals from the joint table; alphabets default to s0, s1, ...
    static SignalModel correlated(JointLikelihood joint,
                                  std::vector<std::vector<std::string>> alphabets = {});
    // Uses the supplied marginals after checking they are the joint's marginals.
    static SignalModel correlated(JointLikelihood joint, std::vector<MarginalLikelihood> marginals);

    SamplingMode mode() const { return mode_; }
    std::size_t num_agents() const { return marginals_.size(); }
    std::size_t num_states() const;
    const std::vector<MarginalLikelihood>& marginals() const { return marginals_; }
    const MarginalLikelihood& marginal(std::size_t agent) const { return marginals_.at(agent); }
    const std::optional<JointLikelihood>& joint() const { return joint_; }

private:
    SignalModel(SamplingMode mode, std::vector<MarginalLikelihood> marginals,
                std::optional<JointLikelihood> joint);

    SamplingMode mode_;
    std::vector<MarginalLikelihood> marginals_;
    std::optional<JointLikelihood> joint_;
};

// Throws NegativeWeight or NonStochasticRow for the first violation, scanning
// rows in order and, within a row, negativity before the row sum.
void validate_network(const Matrix& weights);

// Row-stochastic influence matrix. Entry (i, j) is the weight agent i puts on
// agent j's belief; the diagonal is self-reliance.
class Network {
public:
    explicit Network(Matrix weights);

    std::size_t size() const { return weights_.rows(); }
    const Matrix& weights() const { return weights_; }
    double weight(std::size_t i, std::size_t j) const { return weights_(i, j); }
    double self_reliance(std::size_t i) const { return weights_(i, i); }

    // j != i with a_ij > 0.
    const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_.at(i); }
    // Influence edges (j, i): information flows from j to i when i listens to j.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;

private:
    Matrix weights_;
    std::vector<std::vector<std::size_t>> neighbors_;
};

bool strongly_connected(const Network& network);

// n x |states| matrix whose rows are probability distributions.
class BeliefProfile {
public:
    explicit BeliefProfile(Matrix beliefs);

    static BeliefProfile uniform(std::size_t agents, std::size_t states);
    static BeliefProfile point_mass(std::size_t agents, std::size_t states, std::size_t state);
    // Zero on `state`, uniform over the others.
    static BeliefProfile excluding(std::size_t agents, std::size_t states, std::size_t state);

    std::size_t num_agents() const { return beliefs_.rows(); }
    std::size_t num_states() const { return beliefs_.cols(); }
    const Matrix& matrix() const { return beliefs_; }
    std::span<const double> row(std::size_t agent) const { return beliefs_.row(agent); }
    double operator()(std::size_t agent, std::size_t state) const { return beliefs_(agent, state); }

    friend bool operator==(const BeliefProfile&, const BeliefProfile&) = default;

private:
    Matrix beliefs_;
};

struct AssumptionReport {
    bool strongly_connected = false;
    bool positive_self_reliance = false;
    std::vector<std::size_t> agents_without_self_reliance;
    bool grain_of_truth = false;
    std::vector<std::size_t> agents_with_truth;  // agents with positive prior on the true state
    bool distinguishable = false;
    std::vector<std::vector<std::size_t>> agent_equivalence_sets;
    std::vector<std::size_t> equivalence_set;

    bool all_pass() const {
        return strongly_connected && positive_self_reliance && grain_of_truth && distinguishable;
    }
};

// States whose likelihood row matches the true state's row to within `tol` in
// every column. Exact comparison when the table is rational and tol == 0.
std::vector<std::size_t> observationally_equivalent_set(const MarginalLikelihood& likelihood,
                                                        const StateSpace& states, double tol);
// tol = 0 for exact tables and 1e-12 otherwise.
std::vector<std::size_t> observationally_equivalent_set(const MarginalLikelihood& likelihood,
                                                        const StateSpace& states);

AssumptionReport check_assumptions(const Network& network, const BeliefProfile& initial,
                                   const SignalModel& signal_model, const StateSpace& states);

std::vector<MarginalLikelihood> derive_marginals(const JointLikelihood& joint);

// Product joint of independent marginals (the inverse of derive_marginals on products).
JointLikelihood independent_joint(std::span<const MarginalLikelihood> marginals);

} // namespace soclearn
