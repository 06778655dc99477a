#pragma once

#include "soclearn/analysis.hpp"
#include "soclearn/dynamics.hpp"
#include "soclearn/model.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace soclearn {

struct PersistOptions {
    bool beliefs = true;
    bool forecasts = true;
    bool signals = true;
    bool metrics = true;
    std::size_t stride = 1;  // persist snapshots at multiples of stride (and at the horizon)
};

struct AnalysisOptions {
    std::vector<std::vector<std::vector<std::size_t>>> watch_sequences;  // [agent][k] signal indices
    double epsilon = 1e-3;
    std::size_t window = 50;
    std::optional<std::size_t> k_max;  // per-agent default_k_max when absent
    std::int64_t max_denominator = kDefaultMaxDenominator;
};

// Thresholds for the per-run pass/fail predicates.
struct AcceptanceOptions {
    double forecast_tv = 1e-2;
    double kstep_error = 1e-2;
    double belief_true = 0.99;
    double consensus = 1e-3;
    double min_pass_fraction = 0.95;
    std::vector<std::string> require;  // predicate names a sweep must meet
};

struct ExperimentConfig {
    std::string name;
    ModelBundle model;
    std::size_t horizon = 2000;
    std::vector<std::uint64_t> seeds;
    PersistOptions record;
    AnalysisOptions analysis;
    AcceptanceOptions acceptance;
};

// Parses and validates a JSON config document. `source` names the input in
// ParseError locations.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

// A bundled fixture name (see bundled_fixtures()) or a path to a config file.
ExperimentConfig resolve_config(const std::string& name_or_path);

struct Fixture {
    std::string_view name;
    std::string_view text;
};
const std::vector<Fixture>& bundled_fixtures();
std::optional<std::string_view> bundled_fixture(std::string_view name);

} // namespace soclearn
