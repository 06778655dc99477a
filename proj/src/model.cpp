#include "soclearn/model.hpp"

#include "soclearn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace soclearn {

namespace {

Matrix to_matrix(const RationalTable& table) {
    Matrix m(table.size(), table.empty() ? 0 : table.front().size());
    for (std::size_t r = 0; r < table.size(); ++r) {
        if (table[r].size() != m.cols()) throw DimensionMismatch("ragged rational table");
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = to_double(table[r][c]);
    }
    return m;
}

double row_sum(std::span<const double> row) {
    return std::accumulate(row.begin(), row.end(), 0.0);
}

} // namespace

// ---------------------------------------------------------------- StateSpace

StateSpace::StateSpace(std::vector<std::string> labels, std::size_t true_state)
    : labels_(std::move(labels)), true_state_(true_state) {
    if (labels_.empty()) throw ValidationError("states.labels", "at least one state is required");
    std::set<std::string> seen;
    for (const auto& l : labels_) {
        if (l.empty()) throw ValidationError("states.labels", "labels must be non-empty");
        if (!seen.insert(l).second) throw ValidationError("states.labels", "duplicate label '" + l + "'");
    }
    if (true_state_ >= labels_.size()) {
        throw ValidationError("states.true_state", "index " + std::to_string(true_state_) + " out of range");
    }
}

std::optional<std::size_t> StateSpace::index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

StateSpace StateSpace::numbered(std::size_t count, std::size_t true_state) {
    std::vector<std::string> labels;
    std::size_t next = 1;
    for (std::size_t i = 0; i < count; ++i) {
        labels.push_back(i == true_state ? "theta*" : "theta" + std::to_string(next++));
    }
    return {std::move(labels), true_state};
}

// -------------------------------------------------------- MarginalLikelihood

MarginalLikelihood::MarginalLikelihood(std::size_t agent, Matrix table, std::vector<std::string> alphabet)
    : agent_(agent), table_(std::move(table)), alphabet_(std::move(alphabet)) {
    validate();
}

MarginalLikelihood::MarginalLikelihood(std::size_t agent, RationalTable table, std::vector<std::string> alphabet)
    : agent_(agent), table_(to_matrix(table)), alphabet_(std::move(alphabet)), rational_(std::move(table)) {
    validate();
}

void MarginalLikelihood::validate() const {
    if (table_.rows() == 0 || table_.cols() == 0) {
        throw InvalidLikelihood(agent_, 0, "table must have at least one state and one signal");
    }
    if (alphabet_.size() != table_.cols()) {
        throw DimensionMismatch("agent " + std::to_string(agent_) + ": alphabet has " +
                                std::to_string(alphabet_.size()) + " labels but the table has " +
                                std::to_string(table_.cols()) + " columns");
    }
    std::set<std::string> seen(alphabet_.begin(), alphabet_.end());
    if (seen.size() != alphabet_.size()) {
        throw InvalidLikelihood(agent_, 0, "signal labels must be unique");
    }
    for (std::size_t s = 0; s < table_.rows(); ++s) {
        for (double p : table_.row(s)) {
            if (!(p >= 0.0 && p <= 1.0)) throw InvalidLikelihood(agent_, s, "entry outside [0, 1]");
        }
        if (rational_) {
            Rational total = 0;
            for (const auto& q : (*rational_)[s]) total += q;
            if (total != 1) throw InvalidLikelihood(agent_, s, "row sums to " + to_string(total) + ", not 1");
        } else {
            double total = row_sum(table_.row(s));
            if (std::abs(total - 1.0) > kRowSumTolerance) {
                throw InvalidLikelihood(agent_, s, "row sums to " + std::to_string(total) + ", not 1");
            }
        }
    }
}

std::optional<std::size_t> MarginalLikelihood::signal_index(const std::string& label) const {
    auto it = std::find(alphabet_.begin(), alphabet_.end(), label);
    if (it == alphabet_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - alphabet_.begin());
}

std::vector<std::size_t> MarginalLikelihood::zero_signals(std::size_t state) const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < num_signals(); ++s) {
        if (!(table_(state, s) > 0.0)) out.push_back(s);
    }
    return out;
}

MarginalLikelihood MarginalLikelihood::restrict_signals(std::span<const std::size_t> keep) const {
    std::vector<std::string> labels;
    for (auto s : keep) labels.push_back(alphabet_.at(s));
    if (rational_) {
        RationalTable t(num_states());
        for (std::size_t r = 0; r < num_states(); ++r)
            for (auto s : keep) t[r].push_back((*rational_)[r][s]);
        return {agent_, std::move(t), std::move(labels)};
    }
    Matrix m(num_states(), keep.size());
    for (std::size_t r = 0; r < num_states(); ++r)
        for (std::size_t c = 0; c < keep.size(); ++c) m(r, c) = table_(r, keep[c]);
    return {agent_, std::move(m), std::move(labels)};
}

MarginalLikelihood MarginalLikelihood::for_agent(std::size_t agent) const {
    MarginalLikelihood copy = *this;
    copy.agent_ = agent;
    return copy;
}

std::vector<std::string> MarginalLikelihood::default_alphabet(std::size_t count) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back("s" + std::to_string(i));
    return out;
}

// ----------------------------------------------------------- JointLikelihood

namespace {

std::size_t profile_count(const std::vector<std::size_t>& sizes) {
    std::size_t total = 1;
    for (auto m : sizes) {
        if (m == 0) throw DimensionMismatch("joint likelihood: empty alphabet");
        total *= m;
    }
    return total;
}

} // namespace

JointLikelihood::JointLikelihood(std::vector<std::size_t> sizes, Matrix table)
    : sizes_(std::move(sizes)), table_(std::move(table)) {
    if (table_.cols() != profile_count(sizes_)) {
        throw DimensionMismatch("joint likelihood has " + std::to_string(table_.cols()) +
                                " columns, expected " + std::to_string(profile_count(sizes_)));
    }
    for (std::size_t s = 0; s < table_.rows(); ++s) {
        double total = row_sum(table_.row(s));
        bool in_range = std::all_of(table_.row(s).begin(), table_.row(s).end(),
                                    [](double p) { return p >= 0.0 && p <= 1.0; });
        if (!in_range || std::abs(total - 1.0) > kRowSumTolerance) throw NonStochasticJointRow(s, total);
    }
}

JointLikelihood::JointLikelihood(std::vector<std::size_t> sizes, RationalTable table)
    : sizes_(std::move(sizes)), table_(to_matrix(table)), rational_(std::move(table)) {
    if (table_.cols() != profile_count(sizes_)) {
        throw DimensionMismatch("joint likelihood has " + std::to_string(table_.cols()) +
                                " columns, expected " + std::to_string(profile_count(sizes_)));
    }
    for (std::size_t s = 0; s < table_.rows(); ++s) {
        Rational total = 0;
        for (const auto& q : (*rational_)[s]) {
            if (q < 0 || q > 1) throw NonStochasticJointRow(s, row_sum(table_.row(s)));
            total += q;
        }
        if (total != 1) throw NonStochasticJointRow(s, to_double(total));
    }
}

std::size_t JointLikelihood::profile_index(std::span<const std::size_t> signals) const {
    if (signals.size() != sizes_.size()) throw DimensionMismatch("signal profile length");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        if (signals[i] >= sizes_[i]) throw DimensionMismatch("signal index out of range");
        idx = idx * sizes_[i] + signals[i];
    }
    return idx;
}

std::vector<std::size_t> JointLikelihood::decode(std::size_t profile) const {
    std::vector<std::size_t> out(sizes_.size());
    for (std::size_t i = sizes_.size(); i-- > 0;) {
        out[i] = profile % sizes_[i];
        profile /= sizes_[i];
    }
    return out;
}

// ---------------------------------------------------------------- SignalModel

SignalModel::SignalModel(SamplingMode mode, std::vector<MarginalLikelihood> marginals,
                         std::optional<JointLikelihood> joint)
    : mode_(mode), marginals_(std::move(marginals)), joint_(std::move(joint)) {
    if (marginals_.empty()) throw DimensionMismatch("signal model needs at least one agent");
    for (std::size_t i = 0; i < marginals_.size(); ++i) {
        if (marginals_[i].num_states() != marginals_.front().num_states()) {
            throw DimensionMismatch("agent " + std::to_string(i) + " likelihood has a different state count");
        }
        if (marginals_[i].agent() != i) {
            marginals_[i] = marginals_[i].for_agent(i);
        }
    }
}

std::size_t SignalModel::num_states() const { return marginals_.front().num_states(); }

SignalModel SignalModel::independent(std::vector<MarginalLikelihood> marginals) {
    return {SamplingMode::independent, std::move(marginals), std::nullopt};
}

SignalModel SignalModel::correlated(JointLikelihood joint, std::vector<std::vector<std::string>> alphabets) {
    auto marginals = derive_marginals(joint);
    if (!alphabets.empty()) {
        if (alphabets.size() != marginals.size()) throw DimensionMismatch("alphabet count vs joint agents");
        for (std::size_t i = 0; i < marginals.size(); ++i) {
            const auto& m = marginals[i];
            marginals[i] = m.is_exact() ? MarginalLikelihood(i, *m.rational_table(), alphabets[i])
                                        : MarginalLikelihood(i, m.table(), alphabets[i]);
        }
    }
    return {SamplingMode::joint, std::move(marginals), std::move(joint)};
}

SignalModel SignalModel::correlated(JointLikelihood joint, std::vector<MarginalLikelihood> marginals) {
    auto derived = derive_marginals(joint);
    if (derived.size() != marginals.size()) throw DimensionMismatch("marginal count vs joint agents");
    for (std::size_t i = 0; i < derived.size(); ++i) {
        const auto& a = derived[i].table();
        const auto& b = marginals[i].table();
        if (a.rows() != b.rows() || a.cols() != b.cols()) {
            throw DimensionMismatch("agent " + std::to_string(i) + " marginal shape differs from the joint's");
        }
        for (std::size_t r = 0; r < a.rows(); ++r)
            for (std::size_t c = 0; c < a.cols(); ++c)
                if (std::abs(a(r, c) - b(r, c)) > kRowSumTolerance) {
                    throw InvalidLikelihood(i, r, "marginal is not the marginalization of the joint table");
                }
    }
    return {SamplingMode::joint, std::move(marginals), std::move(joint)};
}

// -------------------------------------------------------------------- Network

void validate_network(const Matrix& weights) {
    if (weights.rows() != weights.cols()) {
        throw DimensionMismatch("weight matrix is " + std::to_string(weights.rows()) + " x " +
                                std::to_string(weights.cols()));
    }
    for (std::size_t i = 0; i < weights.rows(); ++i) {
        for (std::size_t j = 0; j < weights.cols(); ++j) {
            if (!(weights(i, j) >= 0.0)) throw NegativeWeight(i, j, weights(i, j));
        }
        double total = row_sum(weights.row(i));
        if (std::abs(total - 1.0) > kRowSumTolerance) throw NonStochasticRow(i, total);
    }
}

Network::Network(Matrix weights) : weights_(std::move(weights)) {
    validate_network(weights_);
    if (weights_.rows() == 0) throw DimensionMismatch("network needs at least one agent");
    neighbors_.resize(weights_.rows());
    for (std::size_t i = 0; i < weights_.rows(); ++i)
        for (std::size_t j = 0; j < weights_.cols(); ++j)
            if (j != i && weights_(i, j) > 0.0) neighbors_[i].push_back(j);
}

std::vector<std::pair<std::size_t, std::size_t>> Network::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < size(); ++i)
        for (auto j : neighbors_[i]) out.emplace_back(j, i);
    return out;
}

// Kosaraju: one DFS finishing order on the graph, one sweep on its transpose.
// Strongly connected iff the second sweep from the last-finished vertex reaches all.
bool strongly_connected(const Network& network) {
    const std::size_t n = network.size();
    std::vector<std::vector<std::size_t>> out(n), in(n);
    for (auto [from, to] : network.edges()) {
        out[from].push_back(to);
        in[to].push_back(from);
    }

    std::vector<char> seen(n, 0);
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t root = 0; root < n; ++root) {
        if (seen[root]) continue;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
        seen[root] = 1;
        while (!stack.empty()) {
            auto& [v, next] = stack.back();
            if (next < out[v].size()) {
                std::size_t w = out[v][next++];
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.emplace_back(w, 0);
                }
            } else {
                order.push_back(v);
                stack.pop_back();
            }
        }
    }

    std::fill(seen.begin(), seen.end(), 0);
    std::vector<std::size_t> stack{order.back()};
    seen[order.back()] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        std::size_t v = stack.back();
        stack.pop_back();
        for (auto w : in[v]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++reached;
                stack.push_back(w);
            }
        }
    }
    return reached == n;
}

// -------------------------------------------------------------- BeliefProfile

BeliefProfile::BeliefProfile(Matrix beliefs) : beliefs_(std::move(beliefs)) {
    if (beliefs_.rows() == 0 || beliefs_.cols() == 0) throw DimensionMismatch("empty belief profile");
    for (std::size_t i = 0; i < beliefs_.rows(); ++i) {
        for (double p : beliefs_.row(i)) {
            if (!(p >= 0.0 && p <= 1.0)) throw InvalidBeliefs(i, "entry outside [0, 1]");
        }
        double total = row_sum(beliefs_.row(i));
        if (std::abs(total - 1.0) > kRowSumTolerance) {
            throw InvalidBeliefs(i, "row sums to " + std::to_string(total));
        }
    }
}

BeliefProfile BeliefProfile::uniform(std::size_t agents, std::size_t states) {
    return BeliefProfile(Matrix(agents, states, 1.0 / static_cast<double>(states)));
}

BeliefProfile BeliefProfile::point_mass(std::size_t agents, std::size_t states, std::size_t state) {
    Matrix m(agents, states);
    for (std::size_t i = 0; i < agents; ++i) m(i, state) = 1.0;
    return BeliefProfile(std::move(m));
}

BeliefProfile BeliefProfile::excluding(std::size_t agents, std::size_t states, std::size_t state) {
    if (states < 2) throw DimensionMismatch("cannot exclude the only state");
    Matrix m(agents, states, 1.0 / static_cast<double>(states - 1));
    for (std::size_t i = 0; i < agents; ++i) m(i, state) = 0.0;
    return BeliefProfile(std::move(m));
}

// ------------------------------------------------------------------ Checks

std::vector<std::size_t> observationally_equivalent_set(const MarginalLikelihood& likelihood,
                                                        const StateSpace& states, double tol) {
    if (likelihood.num_states() != states.size()) {
        throw DimensionMismatch("likelihood has " + std::to_string(likelihood.num_states()) +
                                " states, state space has " + std::to_string(states.size()));
    }
    const std::size_t truth = states.true_state();
    std::vector<std::size_t> out;
    for (std::size_t theta = 0; theta < states.size(); ++theta) {
        bool equal = true;
        if (likelihood.is_exact() && tol == 0.0) {
            const auto& t = *likelihood.rational_table();
            equal = t[theta] == t[truth];
        } else {
            for (std::size_t s = 0; s < likelihood.num_signals() && equal; ++s) {
                equal = std::abs(likelihood.prob(theta, s) - likelihood.prob(truth, s)) <= tol;
            }
        }
        if (equal || theta == truth) out.push_back(theta);
    }
    return out;
}

std::vector<std::size_t> observationally_equivalent_set(const MarginalLikelihood& likelihood,
                                                        const StateSpace& states) {
    return observationally_equivalent_set(likelihood, states, likelihood.is_exact() ? 0.0 : kRowSumTolerance);
}

AssumptionReport check_assumptions(const Network& network, const BeliefProfile& initial,
                                   const SignalModel& signal_model, const StateSpace& states) {
    const std::size_t n = network.size();
    if (initial.num_agents() != n || signal_model.num_agents() != n) {
        throw DimensionMismatch("agent counts differ: network " + std::to_string(n) + ", beliefs " +
                                std::to_string(initial.num_agents()) + ", signal model " +
                                std::to_string(signal_model.num_agents()));
    }
    if (initial.num_states() != states.size() || signal_model.num_states() != states.size()) {
        throw DimensionMismatch("state counts differ: states " + std::to_string(states.size()) +
                                ", beliefs " + std::to_string(initial.num_states()) + ", signal model " +
                                std::to_string(signal_model.num_states()));
    }

    AssumptionReport report;
    report.strongly_connected = strongly_connected(network);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(network.self_reliance(i) > 0.0)) report.agents_without_self_reliance.push_back(i);
        if (initial(i, states.true_state()) > 0.0) report.agents_with_truth.push_back(i);
    }
    report.positive_self_reliance = report.agents_without_self_reliance.empty();
    report.grain_of_truth = !report.agents_with_truth.empty();

    std::vector<std::size_t> common(states.size());
    std::iota(common.begin(), common.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto eq = observationally_equivalent_set(signal_model.marginal(i), states);
        std::vector<std::size_t> next;
        std::set_intersection(common.begin(), common.end(), eq.begin(), eq.end(), std::back_inserter(next));
        common = std::move(next);
        report.agent_equivalence_sets.push_back(std::move(eq));
    }
    report.equivalence_set = common;
    report.distinguishable = common.size() == 1 && common.front() == states.true_state();
    return report;
}

std::vector<MarginalLikelihood> derive_marginals(const JointLikelihood& joint) {
    const auto& sizes = joint.alphabet_sizes();
    std::vector<MarginalLikelihood> out;
    out.reserve(sizes.size());
    for (std::size_t agent = 0; agent < sizes.size(); ++agent) {
        auto alphabet = MarginalLikelihood::default_alphabet(sizes[agent]);
        if (joint.rational_table()) {
            RationalTable t(joint.num_states(), std::vector<Rational>(sizes[agent], Rational(0)));
            for (std::size_t s = 0; s < joint.num_states(); ++s)
                for (std::size_t p = 0; p < joint.num_profiles(); ++p)
                    t[s][joint.decode(p)[agent]] += (*joint.rational_table())[s][p];
            out.emplace_back(agent, std::move(t), std::move(alphabet));
        } else {
            Matrix m(joint.num_states(), sizes[agent]);
            for (std::size_t s = 0; s < joint.num_states(); ++s)
                for (std::size_t p = 0; p < joint.num_profiles(); ++p)
                    m(s, joint.decode(p)[agent]) += joint.table()(s, p);
            out.emplace_back(agent, std::move(m), std::move(alphabet));
        }
    }
    return out;
}

JointLikelihood independent_joint(std::span<const MarginalLikelihood> marginals) {
    if (marginals.empty()) throw DimensionMismatch("independent_joint needs at least one marginal");
    std::vector<std::size_t> sizes;
    for (const auto& m : marginals) sizes.push_back(m.num_signals());
    const std::size_t states = marginals.front().num_states();
    const std::size_t profiles = profile_count(sizes);
    bool exact = std::all_of(marginals.begin(), marginals.end(), [](const auto& m) { return m.is_exact(); });

    // Decode via a scratch joint-free helper to keep the radix convention in one place.
    auto decode = [&](std::size_t p) {
        std::vector<std::size_t> digits(sizes.size());
        for (std::size_t i = sizes.size(); i-- > 0;) {
            digits[i] = p % sizes[i];
            p /= sizes[i];
        }
        return digits;
    };

    if (exact) {
        RationalTable t(states, std::vector<Rational>(profiles, Rational(1)));
        for (std::size_t s = 0; s < states; ++s)
            for (std::size_t p = 0; p < profiles; ++p) {
                auto d = decode(p);
                for (std::size_t i = 0; i < d.size(); ++i) t[s][p] *= (*marginals[i].rational_table())[s][d[i]];
            }
        return {sizes, std::move(t)};
    }
    Matrix m(states, profiles, 1.0);
    for (std::size_t s = 0; s < states; ++s)
        for (std::size_t p = 0; p < profiles; ++p) {
            auto d = decode(p);
            for (std::size_t i = 0; i < d.size(); ++i) m(s, p) *= marginals[i].prob(s, d[i]);
        }
    return {sizes, std::move(m)};
}

} // namespace soclearn
