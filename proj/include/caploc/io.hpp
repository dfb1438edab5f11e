#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "caploc/errors.hpp"
#include "caploc/geometry.hpp"
#include "caploc/localize.hpp"
#include "caploc/metrics.hpp"
#include "caploc/response.hpp"
#include "caploc/simulate.hpp"
#include "caploc/sweeps.hpp"

namespace caploc::io {

namespace detail {

/// Shortest representation that parses back to the identical double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view token, std::size_t line_no) {
    double v = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end || token.empty()) {
        throw DataError("line " + std::to_string(line_no) + ": '" + std::string(token) +
                        "' is not a number");
    }
    return v;
}

inline long parse_int(std::string_view token, std::size_t line_no) {
    long v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size() || token.empty()) {
        throw DataError("line " + std::to_string(line_no) + ": '" + std::string(token) +
                        "' is not an integer");
    }
    return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

/// File content split into lines; CR and a trailing blank line are dropped.
inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

}  // namespace detail

/// Write content to path via a temp file plus rename, so readers never see a
/// half-written file.
inline void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string());
}

// ---------------------------------------------------------------------------
// Point log CSV: header probe_x_mm,probe_y_mm,s0,...,s{N-1}; one touch per
// row; readings are sample means. Also the ingestion format for hardware logs.
// ---------------------------------------------------------------------------

inline std::string point_logs_to_csv(std::span<const PointLog> logs) {
    if (logs.empty()) throw InvalidArgument("point_logs_to_csv: no logs");
    const std::size_t n = logs[0].readings.size();
    std::ostringstream os;
    os << "probe_x_mm,probe_y_mm";
    for (std::size_t i = 0; i < n; ++i) os << ",s" << i;
    os << "\n";
    for (const PointLog& log : logs) {
        if (log.readings.size() != n) {
            throw DataError("point_logs_to_csv: inconsistent reading counts");
        }
        os << detail::format_double(log.probe_mm.x) << ','
           << detail::format_double(log.probe_mm.y);
        for (double r : log.readings) os << ',' << detail::format_double(r);
        os << "\n";
    }
    return os.str();
}

inline void write_point_logs_csv(const std::filesystem::path& path,
                                 std::span<const PointLog> logs) {
    atomic_write_file(path, point_logs_to_csv(logs));
}

/// Loaded logs carry n_samples = 1: the wire format holds means only.
inline std::vector<PointLog> read_point_logs_csv(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw DataError(path.string() + ": empty point log file");
    const auto header = detail::split_csv_line(lines[0]);
    if (header.size() < 3 || header[0] != "probe_x_mm" || header[1] != "probe_y_mm") {
        throw DataError(path.string() + ": expected header probe_x_mm,probe_y_mm,s0,...");
    }
    for (std::size_t i = 2; i < header.size(); ++i) {
        if (header[i] != "s" + std::to_string(i - 2)) {
            throw DataError(path.string() + ": reading columns must be s0,s1,... in order");
        }
    }
    const std::size_t n = header.size() - 2;
    std::vector<PointLog> logs;
    logs.reserve(lines.size() - 1);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto fields = detail::split_csv_line(lines[li]);
        if (fields.size() != header.size()) {
            throw DataError(path.string() + ": line " + std::to_string(li + 1) +
                            " has " + std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        }
        PointLog log;
        log.probe_mm.x = detail::parse_double(fields[0], li + 1);
        log.probe_mm.y = detail::parse_double(fields[1], li + 1);
        log.n_samples = 1;
        log.readings.reserve(n);
        for (std::size_t i = 2; i < fields.size(); ++i) {
            log.readings.push_back(detail::parse_double(fields[i], li + 1));
        }
        logs.push_back(std::move(log));
    }
    if (logs.empty()) throw DataError(path.string() + ": no point log rows");
    return logs;
}

// ---------------------------------------------------------------------------
// Calibration sample CSV: header distance_mm,reading.
// ---------------------------------------------------------------------------

inline std::string calibration_to_csv(std::span<const CalibrationSample> samples) {
    std::ostringstream os;
    os << "distance_mm,reading\n";
    for (const CalibrationSample& s : samples) {
        os << detail::format_double(s.distance_mm) << ',' << detail::format_double(s.reading)
           << "\n";
    }
    return os.str();
}

inline void write_calibration_csv(const std::filesystem::path& path,
                                  std::span<const CalibrationSample> samples) {
    atomic_write_file(path, calibration_to_csv(samples));
}

inline std::vector<CalibrationSample> read_calibration_csv(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty() || lines[0] != "distance_mm,reading") {
        throw DataError(path.string() + ": expected header distance_mm,reading");
    }
    std::vector<CalibrationSample> samples;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto fields = detail::split_csv_line(lines[li]);
        if (fields.size() != 2) {
            throw DataError(path.string() + ": line " + std::to_string(li + 1) +
                            ": expected distance,reading");
        }
        samples.push_back({detail::parse_double(fields[0], li + 1),
                           detail::parse_double(fields[1], li + 1)});
    }
    return samples;
}

// ---------------------------------------------------------------------------
// Prediction CSV: header sensor_id,pred_x_mm,pred_y_mm,support_count,eta.
// ---------------------------------------------------------------------------

inline std::string predictions_to_csv(std::span<const Prediction> predictions) {
    std::ostringstream os;
    os << "sensor_id,pred_x_mm,pred_y_mm,support_count,eta\n";
    for (const Prediction& p : predictions) {
        os << p.sensor_id << ',' << detail::format_double(p.position_mm.x) << ','
           << detail::format_double(p.position_mm.y) << ',' << p.support_count << ','
           << detail::format_double(p.eta) << "\n";
    }
    return os.str();
}

inline void write_predictions_csv(const std::filesystem::path& path,
                                  std::span<const Prediction> predictions) {
    atomic_write_file(path, predictions_to_csv(predictions));
}

inline std::vector<Prediction> read_predictions_csv(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty() || lines[0] != "sensor_id,pred_x_mm,pred_y_mm,support_count,eta") {
        throw DataError(path.string() + ": unexpected prediction CSV header");
    }
    std::vector<Prediction> out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto f = detail::split_csv_line(lines[li]);
        if (f.size() != 5) {
            throw DataError(path.string() + ": line " + std::to_string(li + 1) +
                            ": expected 5 fields");
        }
        Prediction p;
        p.sensor_id = static_cast<int>(detail::parse_int(f[0], li + 1));
        p.position_mm = {detail::parse_double(f[1], li + 1), detail::parse_double(f[2], li + 1)};
        p.support_count = static_cast<std::size_t>(detail::parse_int(f[3], li + 1));
        p.eta = detail::parse_double(f[4], li + 1);
        out.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// SNR report CSV: header sensor_id,snr_db. Only defined sensors get a row.
// ---------------------------------------------------------------------------

inline std::string snr_report_to_csv(const SnrReport& report) {
    std::ostringstream os;
    os << "sensor_id,snr_db\n";
    for (const SnrEntry& e : report.per_sensor) {
        if (e.valid) os << e.sensor_id << ',' << detail::format_double(e.snr_db) << "\n";
    }
    return os.str();
}

inline void write_snr_csv(const std::filesystem::path& path, const SnrReport& report) {
    atomic_write_file(path, snr_report_to_csv(report));
}

inline std::vector<std::pair<int, double>> read_snr_csv(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty() || lines[0] != "sensor_id,snr_db") {
        throw DataError(path.string() + ": unexpected SNR CSV header");
    }
    std::vector<std::pair<int, double>> out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto f = detail::split_csv_line(lines[li]);
        if (f.size() != 2) {
            throw DataError(path.string() + ": line " + std::to_string(li + 1) +
                            ": expected 2 fields");
        }
        out.emplace_back(static_cast<int>(detail::parse_int(f[0], li + 1)),
                         detail::parse_double(f[1], li + 1));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sweep CSV, long format: param1,param2,trial,sigma_pe_mm (failed trials emit
// nan so the row count stays rectangular).
// ---------------------------------------------------------------------------

struct SweepCsvRow {
    double param1 = 0.0;
    double param2 = 0.0;
    int trial = 0;
    double sigma_pe_mm = 0.0;
};

inline std::string sweep_to_csv(const SweepResult& result) {
    std::ostringstream os;
    os << "param1,param2,trial,sigma_pe_mm\n";
    for (const SweepCell& cell : result.cells) {
        for (const SweepTrial& t : cell.trials) {
            os << detail::format_double(cell.param1) << ',' << detail::format_double(cell.param2)
               << ',' << t.trial << ',' << detail::format_double(t.sigma_pe_mm) << "\n";
        }
    }
    return os.str();
}

inline void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
    atomic_write_file(path, sweep_to_csv(result));
}

inline std::vector<SweepCsvRow> read_sweep_csv(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty() || lines[0] != "param1,param2,trial,sigma_pe_mm") {
        throw DataError(path.string() + ": unexpected sweep CSV header");
    }
    std::vector<SweepCsvRow> out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto f = detail::split_csv_line(lines[li]);
        if (f.size() != 4) {
            throw DataError(path.string() + ": line " + std::to_string(li + 1) +
                            ": expected 4 fields");
        }
        out.push_back({detail::parse_double(f[0], li + 1), detail::parse_double(f[1], li + 1),
                       static_cast<int>(detail::parse_int(f[2], li + 1)),
                       detail::parse_double(f[3], li + 1)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Interpolated map matrix CSV: plain value matrix, row-major, for plotting.
// ---------------------------------------------------------------------------

inline std::string interpolated_map_to_csv(const InterpolatedMap& map) {
    std::ostringstream os;
    for (int r = 0; r < map.rows; ++r) {
        for (int c = 0; c < map.cols; ++c) {
            if (c) os << ',';
            os << detail::format_double(map.values[static_cast<std::size_t>(r) * map.cols + c]);
        }
        os << "\n";
    }
    return os.str();
}

inline void write_interpolated_map_csv(const std::filesystem::path& path,
                                       const InterpolatedMap& map) {
    atomic_write_file(path, interpolated_map_to_csv(map));
}

// ---------------------------------------------------------------------------
// Layout JSON: width_cm, height_cm, transmit_x_cm[], receive_y_cm[]. The file
// speaks cm (tagged by the field names); the library speaks mm.
// ---------------------------------------------------------------------------

inline std::string layout_to_json(const PatchLayout& layout) {
    nlohmann::json j;
    j["width_cm"] = layout.width_mm() / 10.0;
    j["height_cm"] = layout.height_mm() / 10.0;
    auto to_cm = [](const std::vector<double>& v) {
        std::vector<double> out;
        out.reserve(v.size());
        for (double x : v) out.push_back(x / 10.0);
        return out;
    };
    j["transmit_x_cm"] = to_cm(layout.transmit_x_mm());
    j["receive_y_cm"] = to_cm(layout.receive_y_mm());
    return j.dump(2) + "\n";
}

inline void write_layout_json(const std::filesystem::path& path, const PatchLayout& layout) {
    atomic_write_file(path, layout_to_json(layout));
}

inline PatchLayout read_layout_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": invalid JSON: " + e.what());
    }
    try {
        const double w = j.at("width_cm").get<double>() * 10.0;
        const double h = j.at("height_cm").get<double>() * 10.0;
        auto to_mm = [](const nlohmann::json& arr) {
            std::vector<double> out;
            for (const auto& v : arr) out.push_back(v.get<double>() * 10.0);
            return out;
        };
        return PatchLayout(w, h, to_mm(j.at("transmit_x_cm")), to_mm(j.at("receive_y_cm")));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": bad layout document: " + e.what());
    } catch (const InvalidArgument& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Probe grid inference: recover the plan from the probe positions of ingested
// logs. The method needs gridded point logs, so the positions must form a
// complete rows x cols lattice (1e-6 mm tolerance).
// ---------------------------------------------------------------------------

inline ProbePlan infer_plan_from_logs(std::span<const PointLog> logs) {
    if (logs.empty()) throw DataError("infer_plan_from_logs: no point logs");
    std::vector<double> px, py;
    px.reserve(logs.size());
    py.reserve(logs.size());
    for (const PointLog& log : logs) {
        px.push_back(log.probe_mm.x);
        py.push_back(log.probe_mm.y);
    }
    ProbePlan plan;
    const std::vector<double> xs = caploc::detail::cluster_axis(std::move(px));
    const std::vector<double> ys = caploc::detail::cluster_axis(std::move(py));
    plan.cols = static_cast<int>(xs.size());
    plan.rows = static_cast<int>(ys.size());
    if (plan.rows < 2 || plan.cols < 2) {
        throw DataError("irregular probe grid: localization needs at least a 2x2 grid of "
                        "probe positions, found " + std::to_string(plan.rows) + "x" +
                        std::to_string(plan.cols));
    }
    const std::size_t cells = static_cast<std::size_t>(plan.rows) * plan.cols;
    std::vector<int> count(cells, 0);
    for (const PointLog& log : logs) {
        const int c = caploc::detail::axis_index(xs, log.probe_mm.x);
        const int r = caploc::detail::axis_index(ys, log.probe_mm.y);
        if (c < 0 || r < 0) {
            throw DataError("irregular probe grid: probe " +
                            caploc::detail::fmt_pos(log.probe_mm) + " is off-lattice");
        }
        ++count[static_cast<std::size_t>(r) * plan.cols + c];
    }
    for (std::size_t idx = 0; idx < cells; ++idx) {
        if (count[idx] != 1) {
            const int r = static_cast<int>(idx) / plan.cols;
            const int c = static_cast<int>(idx) % plan.cols;
            throw DataError("irregular probe grid: cell (" + std::to_string(r) + ", " +
                            std::to_string(c) + ") at " +
                            caploc::detail::fmt_pos({xs[c], ys[r]}) + " appears " +
                            std::to_string(count[idx]) + " times (expected once)");
        }
    }
    plan.locations_mm.reserve(cells);
    for (int r = 0; r < plan.rows; ++r) {
        for (int c = 0; c < plan.cols; ++c) plan.locations_mm.push_back({xs[c], ys[r]});
    }
    return plan;
}

}  // namespace caploc::io
