#pragma once

#include "soclearn/analysis.hpp"
#include "soclearn/config.hpp"
#include "soclearn/dynamics.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace soclearn {

// Long-form CSV: header "t,agent,kind,key,value", kind in
// {belief, forecast, signal, metric}. Global metrics use agent -1. Rows are
// ordered by t, then kind (belief, forecast, signal, metric), then agent.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, const ConvergenceReport& report,
                          const ExperimentConfig& config);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory,
                          const ConvergenceReport& report, const ExperimentConfig& config);

std::string run_file_name(std::uint64_t seed);

struct CsvRow {
    std::size_t t = 0;
    long agent = 0;
    std::string kind;
    std::string key;
    double value = 0.0;
};

std::vector<CsvRow> read_trajectory_rows(const std::filesystem::path& path);

// Rebuilds the persisted snapshots (beliefs, forecasts, signals) of a run.
// Requires belief rows; forecasts are dropped unless present for every snapshot.
Trajectory trajectory_from_rows(const std::vector<CsvRow>& rows, const ExperimentConfig& config);

// Metric name -> per-agent series as written by write_trajectory_csv,
// keyed as "<name>" with agent -1 for global series.
struct MetricSeries {
    std::string key;
    long agent = 0;
    std::vector<std::size_t> times;
    std::vector<double> values;
};
std::vector<MetricSeries> metric_series(const std::vector<CsvRow>& rows);
// Series that write_trajectory_csv would emit for `report`, restricted to `times`.
std::vector<MetricSeries> metric_series(const ConvergenceReport& report, const ExperimentConfig& config,
                                        const std::vector<std::size_t>& times);

std::string format_number(double value);

// One SVG line chart per metric key (all agents on one chart), written next
// to each run_<seed>.csv in `run_dir`. Returns the files written.
std::vector<std::filesystem::path> plot_run_directory(const std::filesystem::path& run_dir);
std::string render_line_chart(const std::string& title, const std::vector<MetricSeries>& series);

} // namespace soclearn
