#include "soclearn/experiment.hpp"

#include "soclearn/errors.hpp"
#include "soclearn/trajectory_io.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace soclearn {

using nlohmann::json;

namespace {

std::string agent_key(const std::string& name, std::size_t agent) {
    return name + "[agent" + std::to_string(agent) + "]";
}

std::optional<std::size_t> converged_at(const ConvergenceReport& report, const std::vector<double>& series,
                                        double epsilon, std::size_t window) {
    auto idx = detect_convergence(series, epsilon, window);
    if (!idx) return std::nullopt;
    return report.times[*idx];
}

RunSummary failed_summary(const ExperimentConfig& config, std::uint64_t seed, const std::string& kind,
                          const std::string& message) {
    RunSummary s;
    s.seed = seed;
    s.error = message;
    s.error_kind = kind;
    s.predicates[kPredicateForecast] = false;
    s.predicates[kPredicateLearned] = false;
    s.predicates[kPredicateConsensus] = false;
    for (const auto& w : config.analysis.watch_sequences) {
        if (!w.empty()) s.predicates[kPredicateKStep] = false;
    }
    return s;
}

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw Error("IOError", "cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

SweepResult sweep(const ExperimentConfig& config, const SweepOptions& options, bool parallel) {
    if (options.out_dir) std::filesystem::create_directories(*options.out_dir);
    const auto& seeds = config.seeds;
    std::vector<RunSummary> runs(seeds.size());

    auto one = [&](std::size_t k) {
        try {
            auto outcome = run_seed(config, seeds[k]);
            if (options.out_dir && outcome.trajectory) {
                write_trajectory_csv(*options.out_dir / run_file_name(seeds[k]), *outcome.trajectory,
                                     *outcome.report, config);
            }
            runs[k] = std::move(outcome.summary);
        } catch (const Error& e) {
            runs[k] = failed_summary(config, seeds[k], e.kind(), e.what());
        } catch (const std::exception& e) {
            runs[k] = failed_summary(config, seeds[k], "RuntimeError", e.what());
        }
    };

    const auto count = static_cast<std::ptrdiff_t>(seeds.size());
    if (parallel) {
#ifdef _OPENMP
        const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
        for (std::ptrdiff_t k = 0; k < count; ++k) one(static_cast<std::size_t>(k));
#else
        for (std::ptrdiff_t k = 0; k < count; ++k) one(static_cast<std::size_t>(k));
#endif
    } else {
        for (std::ptrdiff_t k = 0; k < count; ++k) one(static_cast<std::size_t>(k));
    }

    SweepResult result;
    result.runs = std::move(runs);
    result.aggregates = aggregate(result.runs);
    if (options.out_dir) write_summary(*options.out_dir / "summary.json", result, config);
    return result;
}

json rate_json(const std::optional<RateFit>& fit) {
    if (!fit) return nullptr;
    return json{{"slope", fit->slope},       {"intercept", fit->intercept}, {"residual", fit->residual},
                {"points", fit->points},     {"first_t", fit->first_time},  {"last_t", fit->last_time}};
}

} // namespace

bool SweepResult::meets(const AcceptanceOptions& acceptance) const {
    for (const auto& name : acceptance.require) {
        auto it = aggregates.pass_fraction.find(name);
        if (it == aggregates.pass_fraction.end() || it->second < acceptance.min_pass_fraction) return false;
    }
    return true;
}

std::vector<std::vector<std::vector<std::size_t>>> watch_sequences(const ExperimentConfig& config) {
    auto w = config.analysis.watch_sequences;
    w.resize(config.model.network.size());
    return w;
}

RunSummary summarize_run(const ExperimentConfig& config, std::uint64_t seed, const ConvergenceReport& report) {
    const auto& acc = config.acceptance;
    const auto& an = config.analysis;
    RunSummary s;
    s.seed = seed;

    bool tv_ok = true, learned = true, kstep_ok = true, any_watch = false;
    for (std::size_t i = 0; i < report.agents.size(); ++i) {
        const auto& a = report.agents[i];
        tv_ok = tv_ok && a.forecast_tv.back() < acc.forecast_tv;
        learned = learned && a.belief_true.back() > acc.belief_true;
        s.terminal_belief_true.push_back(a.belief_true.back());
        s.rates.push_back(a.rate);
        s.convergence_steps[agent_key("forecast_tv", i)] = converged_at(report, a.forecast_tv, an.epsilon, an.window);
        s.convergence_steps[agent_key("residual_mass", i)] =
            converged_at(report, a.residual_mass, an.epsilon, an.window);
        for (std::size_t w = 0; w < a.kstep_error.size(); ++w) {
            any_watch = true;
            kstep_ok = kstep_ok && a.kstep_error[w].back() < acc.kstep_error;
            const auto& lik = config.model.signals.marginal(i);
            s.convergence_steps[agent_key("kstep_error", i) + "[" +
                                format_sequence(lik, report.watch_sequences[i][w], "|") + "]"] =
                converged_at(report, a.kstep_error[w], an.epsilon, an.window);
        }
    }
    s.terminal_consensus = report.consensus.back();
    s.convergence_steps["consensus"] = converged_at(report, report.consensus, an.epsilon, an.window);
    s.predicates[kPredicateForecast] = tv_ok;
    s.predicates[kPredicateLearned] = learned;
    s.predicates[kPredicateConsensus] = s.terminal_consensus < acc.consensus;
    if (any_watch) s.predicates[kPredicateKStep] = kstep_ok;
    return s;
}

RunOutcome run_seed(const ExperimentConfig& config, std::uint64_t seed) {
    RunOutcome outcome;
    try {
        RecordOptions rec;
        rec.forecasts = true;
        rec.signals = true;
        auto traj = simulate(config.model, config.horizon, seed, rec);
        auto report = compute_metrics(traj, config.model.signals, config.model.states, watch_sequences(config));
        outcome.summary = summarize_run(config, seed, report);
        outcome.trajectory = std::move(traj);
        outcome.report = std::move(report);
    } catch (const Error& e) {
        outcome.summary = failed_summary(config, seed, e.kind(), e.what());
    }
    return outcome;
}

SweepResult run_experiment(const ExperimentConfig& config, const SweepOptions& options) {
    return sweep(config, options, true);
}

namespace serial {
SweepResult run_experiment(const ExperimentConfig& config, const SweepOptions& options) {
    return sweep(config, options, false);
}
} // namespace serial

SweepAggregates aggregate(const std::vector<RunSummary>& runs) {
    SweepAggregates agg;
    agg.runs = runs.size();
    std::map<std::string, std::size_t> passes;
    std::map<std::string, std::vector<double>> steps;
    for (const auto& r : runs) {
        if (r.error) ++agg.failed_runs;
        for (const auto& [name, ok] : r.predicates) passes[name] += ok ? 1 : 0;
        for (const auto& [name, step] : r.convergence_steps) {
            auto& v = steps[name];
            if (step) v.push_back(static_cast<double>(*step));
        }
    }
    for (const auto& [name, count] : passes) {
        agg.pass_fraction[name] = runs.empty() ? 0.0 : static_cast<double>(count) / static_cast<double>(runs.size());
    }
    for (auto& [name, v] : steps) {
        if (v.empty()) {
            agg.median_convergence_step[name] = std::nullopt;
            continue;
        }
        std::sort(v.begin(), v.end());
        const std::size_t mid = v.size() / 2;
        agg.median_convergence_step[name] = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
    }
    return agg;
}

json to_json(const RunSummary& s) {
    json steps = json::object();
    for (const auto& [name, step] : s.convergence_steps) steps[name] = step ? json(*step) : json(nullptr);
    json rates = json::array();
    for (const auto& r : s.rates) rates.push_back(rate_json(r));
    json doc{{"seed", s.seed},
             {"predicates", s.predicates},
             {"convergence_steps", steps},
             {"terminal_belief_true", s.terminal_belief_true},
             {"terminal_consensus", s.terminal_consensus},
             {"rates", rates}};
    doc["error"] = s.error ? json(*s.error) : json(nullptr);
    doc["error_kind"] = s.error_kind ? json(*s.error_kind) : json(nullptr);
    return doc;
}

json to_json(const SweepResult& result, const ExperimentConfig& config) {
    json runs = json::array();
    for (const auto& r : result.runs) runs.push_back(to_json(r));
    json medians = json::object();
    for (const auto& [name, m] : result.aggregates.median_convergence_step) medians[name] = m ? json(*m) : json(nullptr);
    return json{{"name", config.name},
                {"horizon", config.horizon},
                {"seeds", config.seeds.size()},
                {"aggregates",
                 {{"runs", result.aggregates.runs},
                  {"failed_runs", result.aggregates.failed_runs},
                  {"pass_fraction", result.aggregates.pass_fraction},
                  {"median_convergence_step", medians},
                  {"required", config.acceptance.require},
                  {"min_pass_fraction", config.acceptance.min_pass_fraction},
                  {"meets_requirements", result.meets(config.acceptance)}}},
                {"runs", runs}};
}

void write_summary(const std::filesystem::path& path, const SweepResult& result, const ExperimentConfig& config) {
    write_json(path, to_json(result, config));
}

std::filesystem::path output_directory(const std::optional<std::string>& explicit_dir) {
    if (explicit_dir && !explicit_dir->empty()) return *explicit_dir;
    if (const char* env = std::getenv("SOCLEARN_OUT_DIR"); env && *env) return env;
    return "out";
}

} // namespace soclearn
