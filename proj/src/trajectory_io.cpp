#include "soclearn/trajectory_io.hpp"

#include "soclearn/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace soclearn {

namespace {

constexpr const char* kHeader = "t,agent,kind,key,value";

std::string kstep_key(const MarginalLikelihood& lik, const std::vector<std::size_t>& seq) {
    return "kstep_error:" + format_sequence(lik, seq, "|");
}

std::vector<std::size_t> persisted_times(const Trajectory& traj, std::size_t stride) {
    std::vector<std::size_t> out;
    for (auto t : traj.times) {
        if (t % stride == 0 || t == traj.horizon) out.push_back(t);
    }
    return out;
}

struct RowWriter {
    std::ostream& out;
    void operator()(std::size_t t, long agent, const char* kind, const std::string& key, double value) const {
        out << t << ',' << agent << ',' << kind << ',' << key << ',' << format_number(value) << '\n';
    }
};

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string format_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw Error("IOError", "number formatting failed");
    return {buf, ptr};
}

std::string run_file_name(std::uint64_t seed) { return "run_" + std::to_string(seed) + ".csv"; }

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const ConvergenceReport& report,
                          const ExperimentConfig& config) {
    const auto& model = config.model;
    const auto& rec = config.record;
    const std::size_t n = model.network.size();
    RowWriter row{out};
    out << kHeader << '\n';

    for (auto t : persisted_times(traj, rec.stride)) {
        auto k = static_cast<std::size_t>(std::find(traj.times.begin(), traj.times.end(), t) - traj.times.begin());
        if (rec.beliefs) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t theta = 0; theta < model.states.size(); ++theta)
                    row(t, static_cast<long>(i), "belief", model.states.label(theta), traj.beliefs[k](i, theta));
        }
        if (rec.forecasts && k < traj.forecasts.size()) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto& lik = model.signals.marginal(i);
                for (std::size_t s = 0; s < lik.num_signals(); ++s)
                    row(t, static_cast<long>(i), "forecast", lik.alphabet()[s], traj.forecasts[k][i][s]);
            }
        }
        if (rec.signals && k > 0 && k - 1 < traj.signals.size()) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto s = traj.signals[k - 1].signals[i];
                row(t, static_cast<long>(i), "signal", model.signals.marginal(i).alphabet()[s], static_cast<double>(s));
            }
        }
        if (rec.metrics) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto& a = report.agents[i];
                row(t, static_cast<long>(i), "metric", "forecast_tv", a.forecast_tv[k]);
                row(t, static_cast<long>(i), "metric", "belief_true", a.belief_true[k]);
                row(t, static_cast<long>(i), "metric", "residual_mass", a.residual_mass[k]);
                for (std::size_t w = 0; w < a.kstep_error.size(); ++w) {
                    row(t, static_cast<long>(i), "metric",
                        kstep_key(model.signals.marginal(i), report.watch_sequences[i][w]), a.kstep_error[w][k]);
                }
            }
            row(t, -1, "metric", "consensus", report.consensus[k]);
        }
    }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, const ConvergenceReport& report,
                          const ExperimentConfig& config) {
    std::ofstream out(path);
    if (!out) throw Error("IOError", "cannot write " + path.string());
    write_trajectory_csv(out, traj, report, config);
    if (!out) throw Error("IOError", "write failed for " + path.string());
}

std::vector<CsvRow> read_trajectory_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), "cannot open file");
    std::string line;
    if (!std::getline(in, line) || line != kHeader) {
        throw ParseError(path.string() + ":1", "expected header '" + std::string(kHeader) + "'");
    }
    std::vector<CsvRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (fields.size() != 5) throw ParseError(where, "expected 5 fields");
        CsvRow r;
        auto parse_int = [&](const std::string& s, auto& value) {
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
            if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError(where, "bad integer '" + s + "'");
        };
        parse_int(fields[0], r.t);
        parse_int(fields[1], r.agent);
        r.kind = fields[2];
        r.key = fields[3];
        auto [p, ec] = std::from_chars(fields[4].data(), fields[4].data() + fields[4].size(), r.value);
        if (ec != std::errc{} || p != fields[4].data() + fields[4].size()) {
            throw ParseError(where, "bad value '" + fields[4] + "'");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

Trajectory trajectory_from_rows(const std::vector<CsvRow>& rows, const ExperimentConfig& config) {
    const auto& model = config.model;
    const std::size_t n = model.network.size();
    const std::size_t states = model.states.size();

    std::map<std::size_t, Matrix> beliefs;
    std::map<std::size_t, std::vector<std::vector<double>>> forecasts;
    std::map<std::size_t, std::vector<std::size_t>> signals;
    std::map<std::size_t, std::size_t> forecast_counts, signal_counts;

    auto agent_of = [&](const CsvRow& r) {
        if (r.agent < 0 || static_cast<std::size_t>(r.agent) >= n) {
            throw ParseError("t=" + std::to_string(r.t), "agent " + std::to_string(r.agent) + " out of range");
        }
        return static_cast<std::size_t>(r.agent);
    };

    for (const auto& r : rows) {
        if (r.kind == "belief") {
            auto i = agent_of(r);
            auto theta = model.states.index_of(r.key);
            if (!theta) throw ParseError("t=" + std::to_string(r.t), "unknown state '" + r.key + "'");
            auto [it, fresh] = beliefs.try_emplace(r.t, n, states, -1.0);
            it->second(i, *theta) = r.value;
        } else if (r.kind == "forecast") {
            auto i = agent_of(r);
            const auto& lik = model.signals.marginal(i);
            auto s = lik.signal_index(r.key);
            if (!s) throw ParseError("t=" + std::to_string(r.t), "unknown signal '" + r.key + "'");
            auto& f = forecasts[r.t];
            if (f.empty()) {
                f.resize(n);
                for (std::size_t a = 0; a < n; ++a) f[a].assign(model.signals.marginal(a).num_signals(), 0.0);
            }
            f[i][*s] = r.value;
            ++forecast_counts[r.t];
        } else if (r.kind == "signal") {
            auto i = agent_of(r);
            auto& sig = signals[r.t];
            if (sig.empty()) sig.assign(n, 0);
            sig[i] = static_cast<std::size_t>(r.value);
            ++signal_counts[r.t];
        }
    }
    if (beliefs.empty()) throw ParseError("trajectory", "no belief rows; cannot rebuild the trajectory");

    std::size_t forecast_entries = 0;
    for (std::size_t i = 0; i < n; ++i) forecast_entries += model.signals.marginal(i).num_signals();

    Trajectory traj;
    bool all_forecasts = true;
    for (auto& [t, m] : beliefs) {
        for (double v : m.data()) {
            if (v < 0.0) throw ParseError("t=" + std::to_string(t), "incomplete belief snapshot");
        }
        traj.times.push_back(t);
        traj.beliefs.emplace_back(std::move(m));
        all_forecasts = all_forecasts && forecast_counts[t] == forecast_entries;
    }
    traj.horizon = traj.times.back();
    if (all_forecasts) {
        for (auto t : traj.times) traj.forecasts.push_back(forecasts[t]);
    }
    // Signals are only meaningful between consecutive snapshots.
    bool consecutive = true;
    for (std::size_t k = 1; k < traj.times.size(); ++k) {
        consecutive = consecutive && traj.times[k] == traj.times[k - 1] + 1 && signal_counts[traj.times[k]] == n;
    }
    if (consecutive) {
        for (std::size_t k = 1; k < traj.times.size(); ++k) traj.signals.push_back({signals[traj.times[k]]});
    }
    return traj;
}

std::vector<MetricSeries> metric_series(const std::vector<CsvRow>& rows) {
    std::vector<MetricSeries> out;
    std::map<std::pair<std::string, long>, std::size_t> index;
    for (const auto& r : rows) {
        if (r.kind != "metric") continue;
        auto [it, fresh] = index.try_emplace({r.key, r.agent}, out.size());
        if (fresh) out.push_back(MetricSeries{r.key, r.agent, {}, {}});
        out[it->second].times.push_back(r.t);
        out[it->second].values.push_back(r.value);
    }
    return out;
}

std::vector<MetricSeries> metric_series(const ConvergenceReport& report, const ExperimentConfig& config,
                                        const std::vector<std::size_t>& times) {
    std::vector<std::size_t> picks;
    for (auto t : times) {
        auto it = std::find(report.times.begin(), report.times.end(), t);
        if (it == report.times.end()) throw DimensionMismatch("time " + std::to_string(t) + " not in report");
        picks.push_back(static_cast<std::size_t>(it - report.times.begin()));
    }
    auto series = [&](const std::string& key, long agent, const std::vector<double>& values) {
        MetricSeries m{key, agent, times, {}};
        for (auto k : picks) m.values.push_back(values[k]);
        return m;
    };
    std::vector<MetricSeries> out;
    for (std::size_t i = 0; i < report.agents.size(); ++i) {
        const auto& a = report.agents[i];
        const auto agent = static_cast<long>(i);
        out.push_back(series("forecast_tv", agent, a.forecast_tv));
        out.push_back(series("belief_true", agent, a.belief_true));
        out.push_back(series("residual_mass", agent, a.residual_mass));
        for (std::size_t w = 0; w < a.kstep_error.size(); ++w) {
            out.push_back(series(kstep_key(config.model.signals.marginal(i), report.watch_sequences[i][w]), agent,
                                 a.kstep_error[w]));
        }
    }
    out.push_back(series("consensus", -1, report.consensus));
    return out;
}

// ---------------------------------------------------------------- plotting

std::string render_line_chart(const std::string& title, const std::vector<MetricSeries>& series) {
    constexpr double width = 720, height = 420, left = 70, right = 20, top = 40, bottom = 50;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    double t_min = 0, t_max = 1, y_min = 0, y_max = 1, min_positive = 1.0;
    bool first = true, any_negative = false;
    for (const auto& s : series)
        for (std::size_t k = 0; k < s.values.size(); ++k) {
            const double t = static_cast<double>(s.times[k]), v = s.values[k];
            if (first) {
                t_min = t_max = t;
                y_min = y_max = v;
                first = false;
            }
            t_min = std::min(t_min, t);
            t_max = std::max(t_max, t);
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
            if (v < 0) any_negative = true;
            if (v > 0) min_positive = std::min(min_positive, v);
        }
    // Log axis for metrics that decay over several decades.
    const bool log_axis = !any_negative && y_max > 0 && min_positive / y_max < 1e-3;
    const double floor = std::max(min_positive, 1e-16);
    auto ty = [&](double v) { return log_axis ? std::log10(std::max(v, floor)) : v; };
    double lo = log_axis ? std::log10(floor) : y_min;
    double hi = log_axis ? std::log10(y_max) : y_max;
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    if (t_max - t_min < 1e-12) t_max = t_min + 1;

    auto px = [&](double t) { return left + (t - t_min) / (t_max - t_min) * (width - left - right); };
    auto py = [&](double v) { return top + (hi - ty(v)) / (hi - lo) * (height - top - bottom); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title) << "</text>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
        << height - bottom << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
        << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double frac = tick / 4.0;
        const double t = t_min + frac * (t_max - t_min);
        const double yv = lo + frac * (hi - lo);
        const double y = top + (1 - frac) * (height - top - bottom);
        svg << "<text x=\"" << px(t) << "\" y=\"" << height - bottom + 18 << "\" text-anchor=\"middle\">"
            << format_number(std::round(t)) << "</text>\n";
        std::ostringstream label;
        label.precision(3);
        if (log_axis) label << "1e" << std::lround(yv);
        else label << yv;
        svg << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << label.str() << "</text>\n";
    }
    svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">t</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = palette[k % std::size(palette)];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t j = 0; j < s.values.size(); ++j) {
            svg << px(static_cast<double>(s.times[j])) << ',' << py(s.values[j]) << ' ';
        }
        svg << "\"/>\n";
        const std::string name = s.agent < 0 ? "all agents" : "agent " + std::to_string(s.agent);
        svg << "<text x=\"" << width - right - 90 << "\" y=\"" << top + 14 * (k + 1) << "\" fill=\"" << color
            << "\">" << name << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::vector<std::filesystem::path> plot_run_directory(const std::filesystem::path& run_dir) {
    if (!std::filesystem::is_directory(run_dir)) throw ParseError(run_dir.string(), "not a directory");
    std::vector<std::filesystem::path> csvs;
    for (const auto& entry : std::filesystem::directory_iterator(run_dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.rfind("run_", 0) == 0 && entry.path().extension() == ".csv") {
            csvs.push_back(entry.path());
        }
    }
    std::sort(csvs.begin(), csvs.end());

    std::vector<std::filesystem::path> written;
    for (const auto& csv : csvs) {
        const auto series = metric_series(read_trajectory_rows(csv));
        std::vector<std::string> keys;
        for (const auto& s : series)
            if (std::find(keys.begin(), keys.end(), s.key) == keys.end()) keys.push_back(s.key);
        for (const auto& key : keys) {
            std::vector<MetricSeries> chart;
            for (const auto& s : series)
                if (s.key == key) chart.push_back(s);
            std::string safe = key;
            for (auto& c : safe)
                if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') c = '_';
            auto path = run_dir / (csv.stem().string() + "_" + safe + ".svg");
            std::ofstream out(path);
            if (!out) throw Error("IOError", "cannot write " + path.string());
            out << render_line_chart(csv.stem().string() + ": " + key, chart);
            written.push_back(path);
        }
    }
    return written;
}

} // namespace soclearn
