#pragma once

#include "soclearn/analysis.hpp"
#include "soclearn/config.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace soclearn {

// Predicate names used in RunSummary::predicates and AcceptanceOptions::require.
inline constexpr const char* kPredicateForecast = "forecast_tv";
inline constexpr const char* kPredicateKStep = "kstep_error";
inline constexpr const char* kPredicateLearned = "learned";
inline constexpr const char* kPredicateConsensus = "consensus";

struct RunSummary {
    std::uint64_t seed = 0;
    std::map<std::string, bool> predicates;
    std::map<std::string, std::optional<std::size_t>> convergence_steps;
    std::vector<double> terminal_belief_true;
    std::vector<std::optional<RateFit>> rates;
    double terminal_consensus = 0.0;
    std::optional<std::string> error;
    std::optional<std::string> error_kind;
};

struct SweepAggregates {
    std::size_t runs = 0;
    std::size_t failed_runs = 0;
    std::map<std::string, double> pass_fraction;
    std::map<std::string, std::optional<double>> median_convergence_step;
};

struct SweepResult {
    std::vector<RunSummary> runs;  // in config seed order
    SweepAggregates aggregates;

    // Every required predicate met by at least min_pass_fraction of the seeds.
    bool meets(const AcceptanceOptions& acceptance) const;
};

struct SweepOptions {
    std::optional<std::filesystem::path> out_dir;  // no files when absent
    int threads = 0;                               // 0: OpenMP default
};

// Per-agent watch sequences with defaults filled in (empty lists when unset).
std::vector<std::vector<std::vector<std::size_t>>> watch_sequences(const ExperimentConfig& config);

RunSummary summarize_run(const ExperimentConfig& config, std::uint64_t seed, const ConvergenceReport& report);

// simulate + compute_metrics + summary for one seed. Errors are captured in
// the summary; the trajectory is returned only for successful runs.
struct RunOutcome {
    RunSummary summary;
    std::optional<Trajectory> trajectory;
    std::optional<ConvergenceReport> report;
};
RunOutcome run_seed(const ExperimentConfig& config, std::uint64_t seed);

// Seeds fan out over OpenMP threads; files are per run and the summary is
// reduced in seed order, so results do not depend on the thread count.
SweepResult run_experiment(const ExperimentConfig& config, const SweepOptions& options = {});

namespace serial {
SweepResult run_experiment(const ExperimentConfig& config, const SweepOptions& options = {});
}

SweepAggregates aggregate(const std::vector<RunSummary>& runs);

nlohmann::json to_json(const RunSummary& summary);
nlohmann::json to_json(const SweepResult& result, const ExperimentConfig& config);
void write_summary(const std::filesystem::path& path, const SweepResult& result, const ExperimentConfig& config);

// Output directory: explicit value, else $SOCLEARN_OUT_DIR, else "out".
std::filesystem::path output_directory(const std::optional<std::string>& explicit_dir);

} // namespace soclearn
