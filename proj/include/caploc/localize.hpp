#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "caploc/errors.hpp"
#include "caploc/geometry.hpp"
#include "caploc/simulate.hpp"
#include "caploc/spline.hpp"

namespace caploc {

namespace detail {

inline constexpr double kGridTolMm = 1e-6;

/// Distinct axis coordinates of a point set, ascending. Values closer than
/// tol collapse into one cluster represented by its smallest member.
inline std::vector<double> cluster_axis(std::vector<double> v, double tol = kGridTolMm) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v) {
        if (out.empty() || x - out.back() > tol) out.push_back(x);
    }
    return out;
}

/// Index of the axis entry within tol of x, or -1.
inline int axis_index(const std::vector<double>& axis, double x, double tol = kGridTolMm) {
    auto it = std::lower_bound(axis.begin(), axis.end(), x);
    for (auto cand : {it, it == axis.begin() ? it : it - 1}) {
        if (cand != axis.end() && std::fabs(*cand - x) <= tol) {
            return static_cast<int>(cand - axis.begin());
        }
    }
    return -1;
}

inline std::string fmt_pos(Vec2 p) {
    std::ostringstream os;
    os << "(" << p.x << ", " << p.y << ") mm";
    return os.str();
}

}  // namespace detail

/// One sensor's readings arranged on the probe grid: cell (r, c) holds the
/// sensor's reading for the touch at (xs_mm[c], ys_mm[r]).
struct PointLogMap {
    int sensor_id = 0;
    int rows = 0;
    int cols = 0;
    std::vector<double> values;  // row-major
    std::vector<double> xs_mm;   // cell-center x per column, ascending
    std::vector<double> ys_mm;   // cell-center y per row, ascending

    double at(int r, int c) const {
        return values[static_cast<std::size_t>(r) * cols + c];
    }
};

/// Point-log map upscaled onto a regular pixel lattice. Pixel (r, c) center is
/// origin_mm + (c * pixel_pitch_mm, r * pixel_pitch_mm). The lattice is
/// centered within the probe-node hull, so hull margins are below half a
/// pitch on each side.
struct InterpolatedMap {
    int sensor_id = 0;
    double pixel_pitch_mm = 0.0;
    Vec2 origin_mm;
    int rows = 0;
    int cols = 0;
    std::vector<double> values;  // row-major

    double x_of(int c) const { return origin_mm.x + c * pixel_pitch_mm; }
    double y_of(int r) const { return origin_mm.y + r * pixel_pitch_mm; }
};

/// Predicted sensor position: unweighted centroid of all pixels whose value
/// exceeds eta times the map maximum (strict inequality).
struct Prediction {
    int sensor_id = 0;
    Vec2 position_mm;
    std::size_t support_count = 0;
    double eta = 0.0;
    /// Set when the prediction lands within half a pixel of the interpolation
    /// hull edge -- the true sensor likely sits at or beyond the probed area.
    bool near_hull_edge = false;
};

/// Arrange one sensor's readings by probe position. The logs must cover every
/// plan cell exactly once (1e-6 mm position tolerance); violations name the
/// offending cell.
inline PointLogMap build_point_log_map(std::span<const PointLog> logs, const ProbePlan& plan,
                                       int sensor_id) {
    std::vector<double> px, py;
    px.reserve(plan.size());
    py.reserve(plan.size());
    for (const Vec2& p : plan.locations_mm) {
        px.push_back(p.x);
        py.push_back(p.y);
    }
    PointLogMap map;
    map.sensor_id = sensor_id;
    map.xs_mm = detail::cluster_axis(std::move(px));
    map.ys_mm = detail::cluster_axis(std::move(py));
    map.cols = static_cast<int>(map.xs_mm.size());
    map.rows = static_cast<int>(map.ys_mm.size());
    if (map.rows != plan.rows || map.cols != plan.cols ||
        plan.size() != static_cast<std::size_t>(map.rows) * map.cols) {
        throw DataError("build_point_log_map: plan locations do not form the declared " +
                        std::to_string(plan.rows) + "x" + std::to_string(plan.cols) + " grid");
    }

    const std::size_t cells = plan.size();
    map.values.assign(cells, 0.0);
    std::vector<char> seen(cells, 0);
    for (const PointLog& log : logs) {
        if (sensor_id < 0 || static_cast<std::size_t>(sensor_id) >= log.readings.size()) {
            throw DataError("build_point_log_map: sensor id " + std::to_string(sensor_id) +
                            " out of range for a log with " +
                            std::to_string(log.readings.size()) + " readings");
        }
        const int c = detail::axis_index(map.xs_mm, log.probe_mm.x);
        const int r = detail::axis_index(map.ys_mm, log.probe_mm.y);
        if (c < 0 || r < 0) {
            throw DataError("build_point_log_map: log probe " + detail::fmt_pos(log.probe_mm) +
                            " does not match any plan grid cell");
        }
        const std::size_t idx = static_cast<std::size_t>(r) * map.cols + c;
        if (seen[idx]) {
            throw DataError("build_point_log_map: duplicate point log for cell (" +
                            std::to_string(r) + ", " + std::to_string(c) + ") at " +
                            detail::fmt_pos({map.xs_mm[c], map.ys_mm[r]}));
        }
        seen[idx] = 1;
        map.values[idx] = log.readings[sensor_id];
    }
    for (std::size_t idx = 0; idx < cells; ++idx) {
        if (!seen[idx]) {
            const int r = static_cast<int>(idx) / map.cols;
            const int c = static_cast<int>(idx) % map.cols;
            throw DataError("build_point_log_map: missing point log for cell (" +
                            std::to_string(r) + ", " + std::to_string(c) + ") at " +
                            detail::fmt_pos({map.xs_mm[c], map.ys_mm[r]}));
        }
    }
    return map;
}

namespace detail {

/// Pixel centers along one axis: pitch-spaced, centered within [lo, hi].
inline std::vector<double> pixel_axis(double lo, double hi, double pitch) {
    const double span = hi - lo;
    const std::size_t n = static_cast<std::size_t>(std::floor(span / pitch + 1e-9)) + 1;
    const double margin = (span - static_cast<double>(n - 1) * pitch) / 2.0;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + margin + static_cast<double>(i) * pitch;
    return out;
}

}  // namespace detail

/// Upscale a point-log map onto a pixel lattice of the requested density
/// (linear pixels per cm) with the C2 bicubic grid spline. Node values are
/// reproduced exactly by the interpolant.
inline InterpolatedMap interpolate(const PointLogMap& map, int pixels_per_cm) {
    if (map.rows < 2 || map.cols < 2) {
        throw InvalidArgument("interpolate: map must be at least 2x2");
    }
    if (pixels_per_cm < 1) throw InvalidArgument("interpolate: pixels_per_cm must be >= 1");

    const double pitch = 10.0 / pixels_per_cm;
    const std::vector<double> px = detail::pixel_axis(map.xs_mm.front(), map.xs_mm.back(), pitch);
    const std::vector<double> py = detail::pixel_axis(map.ys_mm.front(), map.ys_mm.back(), pitch);

    GridSpline2D spline(map.xs_mm, map.ys_mm, map.values);
    InterpolatedMap out;
    out.sensor_id = map.sensor_id;
    out.pixel_pitch_mm = pitch;
    out.origin_mm = {px.front(), py.front()};
    out.cols = static_cast<int>(px.size());
    out.rows = static_cast<int>(py.size());
    out.values = spline.sample(px, py);
    return out;
}

/// Threshold-filtered centroid: average position of every pixel with value
/// strictly above eta * max(values). A flat map (max = min) carries no spike
/// and is reported as ambiguous rather than resolved silently; so is an empty
/// selection (non-positive maximum, or eta = 1 with ties excluded by the
/// strict inequality).
inline Prediction localize_sensor(const InterpolatedMap& interp, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw InvalidArgument("localize_sensor: eta must lie in (0, 1]");
    }
    if (interp.values.empty()) throw InvalidArgument("localize_sensor: empty map");

    const auto [min_it, max_it] =
        std::minmax_element(interp.values.begin(), interp.values.end());
    const double vmax = *max_it;
    if (vmax == *min_it) {
        throw DataError("localize_sensor: all interpolated values are equal; sensor " +
                        std::to_string(interp.sensor_id) + " has no spike and is ambiguous");
    }
    const double cutoff = eta * vmax;
    long double sx = 0.0L, sy = 0.0L;
    std::size_t count = 0;
    std::size_t idx = 0;
    for (int r = 0; r < interp.rows; ++r) {
        const double y = interp.y_of(r);
        for (int c = 0; c < interp.cols; ++c, ++idx) {
            if (interp.values[idx] > cutoff) {
                sx += interp.x_of(c);
                sy += y;
                ++count;
            }
        }
    }
    if (count == 0) {
        throw DataError("localize_sensor: threshold eta=" + std::to_string(eta) +
                        " selects no pixels (flat or non-positive map); sensor " +
                        std::to_string(interp.sensor_id) + " is ambiguous");
    }

    Prediction pred;
    pred.sensor_id = interp.sensor_id;
    pred.position_mm = {static_cast<double>(sx / count), static_cast<double>(sy / count)};
    pred.support_count = count;
    pred.eta = eta;
    const double half = interp.pixel_pitch_mm / 2.0;
    const double xmax = interp.x_of(interp.cols - 1);
    const double ymax = interp.y_of(interp.rows - 1);
    pred.near_hull_edge = pred.position_mm.x - interp.origin_mm.x < half ||
                          xmax - pred.position_mm.x < half ||
                          pred.position_mm.y - interp.origin_mm.y < half ||
                          ymax - pred.position_mm.y < half;
    return pred;
}

/// Outcome of the pipeline for one sensor; failures carry the error text.
struct SensorLocalization {
    int sensor_id = 0;
    std::optional<Prediction> prediction;
    std::string error;

    bool ok() const { return prediction.has_value(); }
};

/// Run map construction, interpolation, and centroid extraction for
/// sensor ids 0..n_sensors-1. Per-sensor failures are recorded and do not
/// abort the remaining sensors.
inline std::vector<SensorLocalization> localize_all(std::span<const PointLog> logs,
                                                    const ProbePlan& plan, int n_sensors,
                                                    double eta, int pixels_per_cm) {
    if (n_sensors < 1) throw InvalidArgument("localize_all: need at least one sensor");
    std::vector<SensorLocalization> out(n_sensors);
    for (int id = 0; id < n_sensors; ++id) {
        out[id].sensor_id = id;
        try {
            const PointLogMap map = build_point_log_map(logs, plan, id);
            const InterpolatedMap interp = interpolate(map, pixels_per_cm);
            out[id].prediction = localize_sensor(interp, eta);
        } catch (const Error& e) {
            out[id].error = e.what();
        }
    }
    return out;
}

inline std::vector<SensorLocalization> localize_all(std::span<const PointLog> logs,
                                                    const ProbePlan& plan,
                                                    const PatchLayout& layout, double eta,
                                                    int pixels_per_cm) {
    const std::size_t n = layout.sensor_count();
    for (const PointLog& log : logs) {
        if (log.readings.size() != n) {
            throw DataError("localize_all: a log carries " +
                            std::to_string(log.readings.size()) + " readings but the layout has " +
                            std::to_string(n) + " sensors");
        }
    }
    return localize_all(logs, plan, static_cast<int>(n), eta, pixels_per_cm);
}

}  // namespace caploc
