#include "soclearn/cli.hpp"

#include "soclearn/analysis.hpp"
#include "soclearn/config.hpp"
#include "soclearn/errors.hpp"
#include "soclearn/experiment.hpp"
#include "soclearn/trajectory_io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace soclearn {

namespace {

// Relative reproduction tolerance for `analyze`.
constexpr double kAnalyzeTolerance = 1e-12;

std::string join(const std::vector<std::size_t>& values) {
    std::string out;
    for (std::size_t k = 0; k < values.size(); ++k) out += (k ? "," : "") + std::to_string(values[k]);
    return out;
}

std::string labels_of(const StateSpace& states, const std::vector<std::size_t>& set) {
    std::string out;
    for (std::size_t k = 0; k < set.size(); ++k) out += (k ? "," : "") + states.label(set[k]);
    return out;
}

std::string yes_no(bool value) { return value ? "true" : "false"; }

std::string delta_text(const Delta& d) {
    std::string out = d.exact ? to_string(*d.exact) + " (" + format_number(d.value) + ")" : format_number(d.value);
    return out;
}

int cmd_validate(const std::string& config_ref, std::ostream& out) {
    const auto config = resolve_config(config_ref);
    const auto& m = config.model;
    const auto report = check_assumptions(m.network, m.initial, m.signals, m.states);
    out << "config: " << config.name << '\n';
    out << "agents: " << m.network.size() << '\n';
    out << "states: " << labels_of(m.states, [&] {
        std::vector<std::size_t> all(m.states.size());
        for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
        return all;
    }()) << '\n';
    out << "true_state: " << m.states.label(m.states.true_state()) << '\n';
    out << "strongly_connected: " << yes_no(report.strongly_connected) << '\n';
    out << "positive_self_reliance: " << yes_no(report.positive_self_reliance);
    if (!report.agents_without_self_reliance.empty())
        out << " (missing: " << join(report.agents_without_self_reliance) << ")";
    out << '\n';
    out << "grain_of_truth: " << yes_no(report.grain_of_truth) << " (agents: " << join(report.agents_with_truth)
        << ")\n";
    out << "distinguishable: " << yes_no(report.distinguishable) << '\n';
    for (std::size_t i = 0; i < report.agent_equivalence_sets.size(); ++i)
        out << "equivalence_set[agent" << i << "]: " << labels_of(m.states, report.agent_equivalence_sets[i]) << '\n';
    out << "equivalence_set: " << labels_of(m.states, report.equivalence_set) << '\n';
    out << "valid: " << yes_no(report.all_pass()) << '\n';
    return report.all_pass() ? kExitOk : kExitFailed;
}

int cmd_simulate(const std::string& config_ref, std::optional<std::uint64_t> seed, std::optional<std::size_t> horizon,
                 const std::optional<std::string>& out_dir, std::ostream& out) {
    auto config = resolve_config(config_ref);
    if (horizon) config.horizon = *horizon;
    const std::uint64_t s = seed ? *seed : (config.seeds.empty() ? 1 : config.seeds.front());
    RecordOptions rec;
    auto traj = simulate(config.model, config.horizon, s, rec);
    auto report = compute_metrics(traj, config.model.signals, config.model.states, watch_sequences(config));
    const auto dir = output_directory(out_dir);
    std::filesystem::create_directories(dir);
    const auto path = dir / run_file_name(s);
    write_trajectory_csv(path, traj, report, config);

    const auto summary = summarize_run(config, s, report);
    out << "wrote: " << path.string() << '\n';
    for (std::size_t i = 0; i < report.agents.size(); ++i) {
        const auto& a = report.agents[i];
        out << "agent" << i << ": belief_true=" << format_number(a.belief_true.back())
            << " forecast_tv=" << format_number(a.forecast_tv.back());
        if (a.rate) out << " rate=" << format_number(a.rate->slope);
        out << '\n';
    }
    out << "consensus: " << format_number(report.consensus.back()) << '\n';
    for (const auto& [name, ok] : summary.predicates) out << "predicate " << name << ": " << yes_no(ok) << '\n';
    return kExitOk;
}

int cmd_sweep(const std::string& config_ref, const std::optional<std::string>& out_dir, int threads,
              std::optional<std::size_t> seeds, std::ostream& out) {
    auto config = resolve_config(config_ref);
    if (seeds) config.seeds.resize(std::min(*seeds, config.seeds.size()));
    SweepOptions options;
    options.out_dir = output_directory(out_dir);
    options.threads = threads;
    const auto result = run_experiment(config, options);
    const auto& agg = result.aggregates;
    out << "config: " << config.name << '\n';
    out << "runs: " << agg.runs << " (failed: " << agg.failed_runs << ")\n";
    for (const auto& [name, frac] : agg.pass_fraction) out << "pass_fraction " << name << ": " << format_number(frac) << '\n';
    for (const auto& [name, m] : agg.median_convergence_step)
        out << "median_step " << name << ": " << (m ? format_number(*m) : "none") << '\n';
    const bool ok = result.meets(config.acceptance);
    out << "summary: " << (*options.out_dir / "summary.json").string() << '\n';
    out << "meets_requirements: " << yes_no(ok) << '\n';
    return ok ? kExitOk : kExitFailed;
}

int cmd_reveal(const std::string& config_ref, std::optional<std::size_t> agent, const std::string& method,
               std::optional<std::size_t> k_max, std::ostream& out) {
    const auto config = resolve_config(config_ref);
    const auto& m = config.model;
    const std::size_t n = m.network.size();
    if (agent && *agent >= n) throw ValidationError("--agent", "agent index out of range");
    std::vector<std::size_t> agents;
    if (agent) agents.push_back(*agent);
    else for (std::size_t i = 0; i < n; ++i) agents.push_back(i);

    int status = kExitOk;
    for (auto i : agents) {
        const auto& lik = m.signals.marginal(i);
        const auto eq = observationally_equivalent_set(lik, m.states);
        out << "agent: " << i << '\n';
        out << "equivalence_set: " << labels_of(m.states, eq) << '\n';
        const auto single = single_revealing_signal(lik, m.states, eq);
        if (single.empty_comparison_set) throw EmptyComparisonSet(i);
        out << "single_signal: " << (single.signal ? lik.alphabet()[*single.signal] : std::string("none")) << '\n';

        std::optional<RevealingSequence> seq;
        if (method == "lcd") {
            seq = lcd_revealing_sequence(lik, m.states, eq, config.analysis.max_denominator);
        } else {
            const auto k = k_max ? *k_max : config.analysis.k_max.value_or(default_k_max(lik, m.states));
            seq = minimal_revealing_sequence(lik, m.states, eq, k);
            out << "k_max: " << k << '\n';
        }
        out << "method: " << method << '\n';
        if (!seq) {
            out << "sequence: none\n";
            status = kExitFailed;
            continue;
        }
        out << "sequence: " << format_sequence(lik, seq->sequence) << '\n';
        out << "length: " << seq->length() << '\n';
        out << "delta: " << delta_text(seq->delta) << '\n';
    }
    return status;
}

int cmd_analyze(const std::string& csv, const std::string& config_ref, std::ostream& out) {
    const auto config = resolve_config(config_ref);
    const auto rows = read_trajectory_rows(csv);
    const auto traj = trajectory_from_rows(rows, config);
    const auto report = compute_metrics(traj, config.model.signals, config.model.states, watch_sequences(config));
    const auto recomputed = metric_series(report, config, report.times);
    const auto stored = metric_series(rows);

    std::map<std::pair<std::string, long>, const MetricSeries*> by_key;
    for (const auto& s : stored) by_key[{s.key, s.agent}] = &s;

    double worst = 0.0;
    std::size_t compared = 0;
    for (const auto& r : recomputed) {
        auto it = by_key.find({r.key, r.agent});
        if (it == by_key.end()) continue;
        const auto& s = *it->second;
        if (s.values.size() != r.values.size()) throw ParseError(csv, "metric '" + r.key + "' has a different length");
        double diff = 0.0;
        for (std::size_t k = 0; k < r.values.size(); ++k) {
            const double scale = std::max(1.0, std::abs(s.values[k]));
            diff = std::max(diff, std::abs(r.values[k] - s.values[k]) / scale);
        }
        worst = std::max(worst, diff);
        ++compared;
        out << "metric " << r.key << (r.agent >= 0 ? "[agent" + std::to_string(r.agent) + "]" : std::string())
            << ": terminal=" << format_number(r.values.back()) << " max_diff=" << format_number(diff) << '\n';
    }
    for (std::size_t i = 0; i < report.agents.size(); ++i) {
        const auto& rate = report.agents[i].rate;
        out << "rate[agent" << i << "]: " << (rate ? format_number(rate->slope) : std::string("none")) << '\n';
    }
    out << "compared: " << compared << '\n';
    out << "max_diff: " << format_number(worst) << '\n';
    const bool ok = worst <= kAnalyzeTolerance;
    out << "reproduced: " << yes_no(ok) << '\n';
    return ok ? kExitOk : kExitFailed;
}

int cmd_plot(const std::string& dir, std::ostream& out) {
    const auto files = plot_run_directory(dir);
    for (const auto& f : files) out << f.string() << '\n';
    out << "plots: " << files.size() << '\n';
    return kExitOk;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message,
                  const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json doc{{"error", kind}, {"message", message}};
    doc.update(extra);
    err << doc.dump() << '\n';
}

bool is_validation_kind(const std::string& kind) {
    static const std::vector<std::string> kinds{"ValidationError",   "ParseError",      "DimensionMismatch",
                                                "NonStochasticRow",  "NegativeWeight",  "InvalidLikelihood",
                                                "NonStochasticJointRow", "InvalidBeliefs", "NotRevealing",
                                                "EmptyComparisonSet"};
    return std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Non-Bayesian social learning: simulation, revealing sequences and sweeps", "soclearn"};
    app.require_subcommand(1);

    std::string config_ref, csv_path, run_dir, method = "lcd";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> horizon, agent, k_max, seed_count;
    std::optional<std::string> out_dir;
    int threads = 0;

    auto* validate = app.add_subcommand("validate", "Check the learning assumptions of a config");
    validate->add_option("config", config_ref, "Config file or bundled fixture name")->required();

    auto* sim = app.add_subcommand("simulate", "Simulate one seed and write run_<seed>.csv");
    sim->add_option("config", config_ref, "Config file or bundled fixture name")->required();
    sim->add_option("--seed", seed, "Seed (default: first configured seed)");
    sim->add_option("--horizon", horizon, "Override the horizon");
    sim->add_option("--out", out_dir, "Output directory (default: $SOCLEARN_OUT_DIR or out)");

    auto* sw = app.add_subcommand("sweep", "Run every configured seed and write summary.json");
    sw->add_option("config", config_ref, "Config file or bundled fixture name")->required();
    sw->add_option("--out", out_dir, "Output directory (default: $SOCLEARN_OUT_DIR or out)");
    sw->add_option("--threads", threads, "Worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);
    sw->add_option("--seeds", seed_count, "Use only the first N configured seeds");

    auto* rev = app.add_subcommand("reveal", "Find revealing signal sequences");
    rev->add_option("config", config_ref, "Config file or bundled fixture name")->required();
    rev->add_option("--agent", agent, "Agent index (default: all agents)");
    rev->add_option("--method", method, "lcd or brute")->check(CLI::IsMember({"lcd", "brute"}));
    rev->add_option("--k-max", k_max, "Largest length searched by the brute-force method");

    auto* an = app.add_subcommand("analyze", "Recompute metrics from a trajectory CSV");
    an->add_option("trajectory", csv_path, "run_<seed>.csv")->required();
    an->add_option("config", config_ref, "Config the run was produced with")->required();

    auto* pl = app.add_subcommand("plot", "Render SVG charts for every run in a directory");
    pl->add_option("run_dir", run_dir, "Directory holding run_<seed>.csv files")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        report_error(err, "UsageError", e.what());
        return kExitError;
    }

    try {
        if (*validate) return cmd_validate(config_ref, out);
        if (*sim) return cmd_simulate(config_ref, seed, horizon, out_dir, out);
        if (*sw) return cmd_sweep(config_ref, out_dir, threads, seed_count, out);
        if (*rev) return cmd_reveal(config_ref, agent, method, k_max, out);
        if (*an) return cmd_analyze(csv_path, config_ref, out);
        if (*pl) return cmd_plot(run_dir, out);
    } catch (const ValidationError& e) {
        report_error(err, e.kind(), e.what(), {{"field", e.field}});
        return kExitFailed;
    } catch (const ParseError& e) {
        report_error(err, e.kind(), e.what(), {{"location", e.location}});
        return kExitFailed;
    } catch (const Error& e) {
        report_error(err, e.kind(), e.what());
        return is_validation_kind(e.kind()) ? kExitFailed : kExitError;
    } catch (const std::exception& e) {
        report_error(err, "RuntimeError", e.what());
        return kExitError;
    }
    return kExitError;
}

} // namespace soclearn
