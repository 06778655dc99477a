#include "soclearn/config.hpp"

#include "soclearn/errors.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace soclearn {

using nlohmann::json;

namespace {

struct Number {
    double value = 0.0;
    std::optional<Rational> exact;
};

std::string idx(std::size_t i) { return "[" + std::to_string(i) + "]"; }

// Labels end up as CSV fields, so they may not contain separators or quotes.
void check_label(const std::string& label, const std::string& path) {
    if (label.find_first_of(",\"\n\r|") != std::string::npos) {
        throw ValidationError(path, "label '" + label + "' may not contain ',', '|', quotes or newlines");
    }
}

const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) throw ValidationError(path + "." + key, "missing");
    return obj.at(key);
}

Number parse_number(const json& v, const std::string& path) {
    if (v.is_number_integer()) {
        return {v.get<double>(), Rational(v.get<long long>())};
    }
    if (v.is_number()) return {v.get<double>(), std::nullopt};
    if (!v.is_string()) throw ValidationError(path, "expected a number or a \"p/q\" string");
    const auto text = v.get<std::string>();
    if (auto exact = parse_exact_rational(text)) return {to_double(*exact), exact};
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ValidationError(path, "cannot parse '" + text + "' as a number");
    }
    return {value, std::nullopt};
}

std::vector<Number> parse_row(const json& v, const std::string& path) {
    if (!v.is_array()) throw ValidationError(path, "expected an array");
    std::vector<Number> row;
    for (std::size_t k = 0; k < v.size(); ++k) row.push_back(parse_number(v[k], path + idx(k)));
    return row;
}

std::vector<std::vector<Number>> parse_matrix(const json& v, const std::string& path) {
    if (!v.is_array()) throw ValidationError(path, "expected an array of rows");
    std::vector<std::vector<Number>> rows;
    for (std::size_t r = 0; r < v.size(); ++r) rows.push_back(parse_row(v[r], path + idx(r)));
    return rows;
}

Matrix to_real_matrix(const std::vector<std::vector<Number>>& rows, const std::string& path) {
    std::vector<std::vector<double>> values;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r > 0 && rows[r].size() != rows.front().size()) {
            throw ValidationError(path + idx(r), "row length differs from row 0");
        }
        values.emplace_back();
        for (const auto& x : rows[r]) values.back().push_back(x.value);
    }
    return Matrix::from_rows(values);
}

bool all_exact(const std::vector<std::vector<Number>>& rows) {
    for (const auto& r : rows)
        for (const auto& x : r)
            if (!x.exact) return false;
    return true;
}

std::size_t state_ref(const json& v, const StateSpace* states, std::size_t count, const std::string& path) {
    if (v.is_number_unsigned() || v.is_number_integer()) {
        auto k = v.get<long long>();
        if (k < 0 || static_cast<std::size_t>(k) >= count) throw ValidationError(path, "state index out of range");
        return static_cast<std::size_t>(k);
    }
    if (v.is_string() && states) {
        if (auto k = states->index_of(v.get<std::string>())) return *k;
        throw ValidationError(path, "unknown state '" + v.get<std::string>() + "'");
    }
    throw ValidationError(path, "expected a state index or label");
}

StateSpace parse_states(const json& doc) {
    const auto& node = require(doc, "states", "");
    const auto& labels_node = require(node, "labels", "states");
    if (!labels_node.is_array()) throw ValidationError("states.labels", "expected an array of strings");
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < labels_node.size(); ++k) {
        if (!labels_node[k].is_string()) throw ValidationError("states.labels" + idx(k), "expected a string");
        labels.push_back(labels_node[k].get<std::string>());
        check_label(labels.back(), "states.labels" + idx(k));
    }
    std::size_t truth = 0;
    if (node.contains("true_state")) {
        const auto& t = node.at("true_state");
        if (t.is_string()) {
            auto it = std::find(labels.begin(), labels.end(), t.get<std::string>());
            if (it == labels.end()) throw ValidationError("states.true_state", "unknown label");
            truth = static_cast<std::size_t>(it - labels.begin());
        } else {
            truth = state_ref(t, nullptr, labels.size(), "states.true_state");
        }
    }
    return {std::move(labels), truth};
}

enum class ZeroSignals { reject, allow, prune };

ZeroSignals parse_zero_policy(const json& signals) {
    if (!signals.contains("zero_signals")) return ZeroSignals::reject;
    const auto& v = signals.at("zero_signals");
    if (v == "reject") return ZeroSignals::reject;
    if (v == "allow") return ZeroSignals::allow;
    if (v == "prune") return ZeroSignals::prune;
    throw ValidationError("signals.zero_signals", "expected \"reject\", \"allow\" or \"prune\"");
}

std::vector<std::string> parse_alphabet(const json& node, std::size_t columns, const std::string& path) {
    if (!node.contains("alphabet")) return MarginalLikelihood::default_alphabet(columns);
    const auto& a = node.at("alphabet");
    if (!a.is_array()) throw ValidationError(path + ".alphabet", "expected an array of strings");
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (!a[k].is_string()) throw ValidationError(path + ".alphabet" + idx(k), "expected a string");
        out.push_back(a[k].get<std::string>());
        check_label(out.back(), path + ".alphabet" + idx(k));
        if (!seen.insert(out.back()).second) throw ValidationError(path + ".alphabet", "duplicate signal label");
    }
    return out;
}

MarginalLikelihood parse_likelihood(const json& node, std::size_t agent, const StateSpace& states,
                                    ZeroSignals policy, const std::string& node_path) {
    const std::string field = "likelihood[agent" + std::to_string(agent) + "]";
    const auto rows = parse_matrix(require(node, "likelihood", node_path), node_path + ".likelihood");
    if (rows.size() != states.size()) {
        throw ValidationError(field, "has " + std::to_string(rows.size()) + " rows for " +
                                         std::to_string(states.size()) + " states");
    }
    const std::size_t cols = rows.front().size();
    if (cols == 0) throw ValidationError(field, "needs at least one signal");
    const bool exact = all_exact(rows);
    for (std::size_t s = 0; s < rows.size(); ++s) {
        const std::string row_field = field + "[" + states.label(s) + "]";
        if (rows[s].size() != cols) throw ValidationError(row_field, "row length differs from the first row");
        double total = 0.0;
        Rational exact_total = 0;
        for (const auto& x : rows[s]) {
            if (!(x.value >= 0.0 && x.value <= 1.0)) throw ValidationError(row_field, "probability outside [0, 1]");
            total += x.value;
            if (exact) exact_total += *x.exact;
        }
        if (exact ? exact_total != 1 : std::abs(total - 1.0) > kRowSumTolerance) {
            throw ValidationError(row_field, "row sums to " + (exact ? to_string(exact_total) : std::to_string(total)) +
                                                 ", expected 1");
        }
    }
    auto alphabet = parse_alphabet(node, cols, node_path);
    if (alphabet.size() != cols) {
        throw ValidationError(node_path + ".alphabet", "has " + std::to_string(alphabet.size()) + " labels for " +
                                                           std::to_string(cols) + " columns");
    }

    std::optional<MarginalLikelihood> lik;
    if (exact) {
        RationalTable t;
        for (const auto& r : rows) {
            t.emplace_back();
            for (const auto& x : r) t.back().push_back(*x.exact);
        }
        lik.emplace(agent, std::move(t), std::move(alphabet));
    } else {
        lik.emplace(agent, to_real_matrix(rows, node_path + ".likelihood"), std::move(alphabet));
    }

    const auto zeros = lik->zero_signals(states.true_state());
    if (zeros.empty() || policy == ZeroSignals::allow) return *lik;
    const std::string truth_field = field + "[" + states.label(states.true_state()) + "]";
    if (policy == ZeroSignals::reject) {
        throw ValidationError(truth_field, "signal '" + lik->alphabet()[zeros.front()] +
                                               "' has zero probability under the true state");
    }
    for (auto s : zeros) {
        for (std::size_t theta = 0; theta < states.size(); ++theta) {
            if (lik->prob(theta, s) > 0.0) {
                throw ValidationError(field + "[" + states.label(theta) + "]",
                                      "cannot prune signal '" + lik->alphabet()[s] + "': positive under this state");
            }
        }
    }
    std::vector<std::size_t> keep;
    for (std::size_t s = 0; s < lik->num_signals(); ++s)
        if (std::find(zeros.begin(), zeros.end(), s) == zeros.end()) keep.push_back(s);
    return lik->restrict_signals(keep);
}

Network parse_network(const json& doc) {
    const auto& node = require(doc, "network", "");
    const auto rows = parse_matrix(require(node, "weights", "network"), "network.weights");
    if (rows.empty()) throw ValidationError("network.weights", "needs at least one agent");
    auto weights = to_real_matrix(rows, "network.weights");
    if (weights.rows() != weights.cols()) {
        throw ValidationError("network.weights", "must be square, got " + std::to_string(weights.rows()) + " x " +
                                                     std::to_string(weights.cols()));
    }
    try {
        return Network(std::move(weights));
    } catch (const NegativeWeight& e) {
        throw ValidationError("network.weights" + idx(e.row) + idx(e.col), "negative weight");
    } catch (const NonStochasticRow& e) {
        throw ValidationError("network.weights" + idx(e.row), "row sums to " + std::to_string(e.sum) + ", expected 1");
    }
}

SignalModel parse_signals(const json& doc, const StateSpace& states, std::size_t agents) {
    const auto& node = require(doc, "signals", "");
    const auto policy = parse_zero_policy(node);
    std::string mode = node.value("mode", std::string("independent"));
    if (mode != "independent" && mode != "joint") {
        throw ValidationError("signals.mode", "expected \"independent\" or \"joint\"");
    }

    std::vector<MarginalLikelihood> marginals;
    if (node.contains("agents")) {
        const auto& list = node.at("agents");
        if (!list.is_array()) throw ValidationError("signals.agents", "expected an array");
        if (list.size() != agents) {
            throw ValidationError("signals.agents", "has " + std::to_string(list.size()) + " entries for " +
                                                        std::to_string(agents) + " agents");
        }
        for (std::size_t i = 0; i < agents; ++i) {
            marginals.push_back(parse_likelihood(list[i], i, states, policy, "signals.agents" + idx(i)));
        }
    } else if (node.contains("shared")) {
        auto shared = parse_likelihood(node.at("shared"), 0, states, policy, "signals.shared");
        for (std::size_t i = 0; i < agents; ++i) marginals.push_back(shared.for_agent(i));
    } else if (mode == "independent") {
        throw ValidationError("signals", "needs \"agents\" or \"shared\"");
    }

    if (mode == "independent") return SignalModel::independent(std::move(marginals));

    const auto& joint_node = require(node, "joint", "signals");
    const auto rows = parse_matrix(require(joint_node, "table", "signals.joint"), "signals.joint.table");
    if (rows.size() != states.size()) throw ValidationError("signals.joint.table", "needs one row per state");
    std::vector<std::size_t> sizes;
    if (joint_node.contains("alphabet_sizes")) {
        sizes = joint_node.at("alphabet_sizes").get<std::vector<std::size_t>>();
    } else if (!marginals.empty()) {
        for (const auto& m : marginals) sizes.push_back(m.num_signals());
    } else {
        throw ValidationError("signals.joint.alphabet_sizes", "missing (and no per-agent alphabets given)");
    }
    if (sizes.size() != agents) throw ValidationError("signals.joint.alphabet_sizes", "needs one size per agent");
    try {
        std::optional<JointLikelihood> joint;
        if (all_exact(rows)) {
            RationalTable t;
            for (const auto& r : rows) {
                t.emplace_back();
                for (const auto& x : r) t.back().push_back(*x.exact);
            }
            joint.emplace(sizes, std::move(t));
        } else {
            joint.emplace(sizes, to_real_matrix(rows, "signals.joint.table"));
        }
        if (!marginals.empty()) return SignalModel::correlated(std::move(*joint), std::move(marginals));
        std::vector<std::vector<std::string>> alphabets;
        if (joint_node.contains("alphabets")) {
            alphabets = joint_node.at("alphabets").get<std::vector<std::vector<std::string>>>();
        }
        return SignalModel::correlated(std::move(*joint), std::move(alphabets));
    } catch (const NonStochasticJointRow& e) {
        throw ValidationError("signals.joint.table[" + states.label(e.state) + "]", e.what());
    } catch (const InvalidLikelihood& e) {
        throw ValidationError("likelihood[agent" + std::to_string(e.agent) + "][" + states.label(e.state) + "]",
                              e.reason);
    } catch (const DimensionMismatch& e) {
        throw ValidationError("signals.joint", e.what());
    }
}

BeliefProfile parse_beliefs(const json& doc, const StateSpace& states, std::size_t agents) {
    const std::string path = "initial_beliefs";
    if (!doc.contains("initial_beliefs")) return BeliefProfile::uniform(agents, states.size());
    const auto& node = doc.at("initial_beliefs");
    std::string preset;
    const json* args = nullptr;
    if (node.is_string()) {
        preset = node.get<std::string>();
    } else if (node.is_object()) {
        preset = node.value("preset", std::string());
        args = &node;
        if (preset.empty() && node.contains("rows")) return parse_beliefs(json{{"initial_beliefs", node.at("rows")}}, states, agents);
    } else if (node.is_array()) {
        const auto rows = parse_matrix(node, path);
        if (rows.size() != agents) {
            throw ValidationError(path, "has " + std::to_string(rows.size()) + " rows for " + std::to_string(agents) +
                                            " agents");
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != states.size()) throw ValidationError(path + idx(i), "needs one entry per state");
        }
        try {
            return BeliefProfile(to_real_matrix(rows, path));
        } catch (const InvalidBeliefs& e) {
            throw ValidationError(path + idx(e.agent), e.what());
        }
    } else {
        throw ValidationError(path, "expected a preset name, a preset object or explicit rows");
    }

    if (preset == "uniform") return BeliefProfile::uniform(agents, states.size());
    if (preset == "point_mass") {
        std::size_t state = states.true_state();
        if (args && args->contains("state")) state = state_ref(args->at("state"), &states, states.size(), path + ".state");
        return BeliefProfile::point_mass(agents, states.size(), state);
    }
    if (preset == "zero_on_true") {
        if (states.size() < 2) throw ValidationError(path, "zero_on_true needs at least two states");
        return BeliefProfile::excluding(agents, states.size(), states.true_state());
    }
    throw ValidationError(path, "unknown preset '" + preset + "'");
}

std::vector<std::uint64_t> parse_seeds(const json& doc) {
    if (!doc.contains("seeds")) {
        std::vector<std::uint64_t> seeds(200);
        for (std::size_t k = 0; k < seeds.size(); ++k) seeds[k] = 1 + k;
        return seeds;
    }
    const auto& node = doc.at("seeds");
    std::vector<std::uint64_t> seeds;
    if (node.is_array()) {
        for (std::size_t k = 0; k < node.size(); ++k) {
            if (!node[k].is_number_unsigned()) throw ValidationError("seeds" + idx(k), "expected a non-negative integer");
            seeds.push_back(node[k].get<std::uint64_t>());
        }
    } else if (node.is_object()) {
        const auto count = node.value("count", std::uint64_t{0});
        const auto base = node.value("base", std::uint64_t{1});
        for (std::uint64_t k = 0; k < count; ++k) seeds.push_back(base + k);
    } else {
        throw ValidationError("seeds", "expected a list or {\"count\", \"base\"}");
    }
    if (seeds.empty()) throw ValidationError("seeds", "at least one seed is required");
    return seeds;
}

std::vector<std::size_t> parse_sequence(const json& v, const MarginalLikelihood& lik, const std::string& path) {
    std::vector<std::string> labels;
    if (v.is_string()) {
        std::stringstream ss(v.get<std::string>());
        for (std::string item; std::getline(ss, item, ',');) labels.push_back(item);
    } else if (v.is_array()) {
        for (const auto& x : v) {
            if (!x.is_string()) throw ValidationError(path, "expected signal labels");
            labels.push_back(x.get<std::string>());
        }
    } else {
        throw ValidationError(path, "expected a list of signal labels or \"a,b,c\"");
    }
    if (labels.empty()) throw ValidationError(path, "sequence must be non-empty");
    std::vector<std::size_t> seq;
    for (const auto& l : labels) {
        auto s = lik.signal_index(l);
        if (!s) throw ValidationError(path, "unknown signal '" + l + "' for agent " + std::to_string(lik.agent()));
        seq.push_back(*s);
    }
    return seq;
}

AnalysisOptions parse_analysis(const json& doc, const SignalModel& signals) {
    AnalysisOptions opts;
    opts.watch_sequences.resize(signals.num_agents());
    if (!doc.contains("analysis")) return opts;
    const auto& node = doc.at("analysis");
    opts.epsilon = node.value("epsilon", opts.epsilon);
    opts.window = node.value("window", opts.window);
    opts.max_denominator = node.value("max_denominator", opts.max_denominator);
    if (node.contains("k_max")) opts.k_max = node.at("k_max").get<std::size_t>();
    if (!(opts.epsilon > 0.0)) throw ValidationError("analysis.epsilon", "must be positive");
    if (opts.window == 0) throw ValidationError("analysis.window", "must be at least 1");
    if (opts.max_denominator < 1) throw ValidationError("analysis.max_denominator", "must be at least 1");
    if (opts.k_max && *opts.k_max == 0) throw ValidationError("analysis.k_max", "must be at least 1");

    if (node.contains("watch_sequences")) {
        const auto& w = node.at("watch_sequences");
        const std::string path = "analysis.watch_sequences";
        if (w.is_object() && w.contains("all")) {
            for (std::size_t i = 0; i < signals.num_agents(); ++i) {
                const auto& list = w.at("all");
                for (std::size_t k = 0; k < list.size(); ++k) {
                    opts.watch_sequences[i].push_back(
                        parse_sequence(list[k], signals.marginal(i), path + ".all" + idx(k)));
                }
            }
        } else if (w.is_array()) {
            if (w.size() != signals.num_agents()) throw ValidationError(path, "needs one list per agent");
            for (std::size_t i = 0; i < w.size(); ++i)
                for (std::size_t k = 0; k < w[i].size(); ++k)
                    opts.watch_sequences[i].push_back(
                        parse_sequence(w[i][k], signals.marginal(i), path + idx(i) + idx(k)));
        } else {
            throw ValidationError(path, "expected per-agent lists or {\"all\": [...]}");
        }
    }
    return opts;
}

AcceptanceOptions parse_acceptance(const json& doc) {
    AcceptanceOptions a;
    if (!doc.contains("acceptance")) return a;
    const auto& node = doc.at("acceptance");
    a.forecast_tv = node.value("forecast_tv", a.forecast_tv);
    a.kstep_error = node.value("kstep_error", a.kstep_error);
    a.belief_true = node.value("belief_true", a.belief_true);
    a.consensus = node.value("consensus", a.consensus);
    a.min_pass_fraction = node.value("min_pass_fraction", a.min_pass_fraction);
    if (node.contains("require")) a.require = node.at("require").get<std::vector<std::string>>();
    static const std::set<std::string> known{"forecast_tv", "kstep_error", "learned", "consensus"};
    for (const auto& r : a.require) {
        if (!known.count(r)) throw ValidationError("acceptance.require", "unknown predicate '" + r + "'");
    }
    return a;
}

PersistOptions parse_record(const json& doc) {
    PersistOptions r;
    if (!doc.contains("record")) return r;
    const auto& node = doc.at("record");
    r.beliefs = node.value("beliefs", r.beliefs);
    r.forecasts = node.value("forecasts", r.forecasts);
    r.signals = node.value("signals", r.signals);
    r.metrics = node.value("metrics", r.metrics);
    r.stride = node.value("stride", r.stride);
    if (r.stride == 0) throw ValidationError("record.stride", "must be at least 1");
    return r;
}

void check_keys(const json& doc) {
    static const std::set<std::string> known{"name",  "states",  "signals",  "network", "initial_beliefs",
                                             "horizon", "seeds", "record",   "analysis", "acceptance",
                                             "description"};
    for (const auto& [key, _] : doc.items()) {
        if (!known.count(key)) throw ValidationError(key, "unknown top-level key");
    }
}

} // namespace

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(source + ":byte " + std::to_string(e.byte), e.what());
    }
    if (!doc.is_object()) throw ParseError(source, "top level must be an object");
    check_keys(doc);

    try {
        auto states = parse_states(doc);
        auto network = parse_network(doc);
        const std::size_t agents = network.size();
        auto signals = parse_signals(doc, states, agents);
        auto beliefs = parse_beliefs(doc, states, agents);
        try {
            (void)check_assumptions(network, beliefs, signals, states);
        } catch (const DimensionMismatch& e) {
            throw ValidationError("model", e.what());
        }

        long long horizon = doc.value("horizon", 2000LL);
        if (horizon < 0) throw ValidationError("horizon", "must be non-negative");

        auto analysis = parse_analysis(doc, signals);
        ExperimentConfig cfg{
            doc.value("name", std::string("experiment")),
            ModelBundle{std::move(states), std::move(signals), std::move(network), std::move(beliefs)},
            static_cast<std::size_t>(horizon),
            parse_seeds(doc),
            parse_record(doc),
            std::move(analysis),
            parse_acceptance(doc),
        };
        return cfg;
    } catch (const json::exception& e) {
        throw ValidationError(source, e.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), "cannot open file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.string());
}

ExperimentConfig resolve_config(const std::string& name_or_path) {
    if (!std::filesystem::exists(name_or_path)) {
        if (auto text = bundled_fixture(name_or_path)) return parse_config(*text, name_or_path);
    }
    return load_config(name_or_path);
}

std::optional<std::string_view> bundled_fixture(std::string_view name) {
    for (const auto& f : bundled_fixtures()) {
        if (f.name == name) return f.text;
    }
    return std::nullopt;
}

} // namespace soclearn
