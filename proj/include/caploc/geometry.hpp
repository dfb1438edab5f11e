#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "caploc/errors.hpp"

namespace caploc {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Rectangular sensing patch. x runs along the long axis (width_mm), y across
/// the short axis (height_mm), origin at a patch corner. A sensor exists at
/// every crossing of a transmit electrode (fixed x) with a receive electrode
/// (fixed y). Immutable after construction; the constructor enforces that
/// electrode coordinate lists are strictly increasing and strictly inside the
/// patch rectangle.
class PatchLayout {
public:
    PatchLayout(double width_mm, double height_mm,
                std::vector<double> transmit_x_mm, std::vector<double> receive_y_mm)
        : width_mm_(width_mm),
          height_mm_(height_mm),
          transmit_x_mm_(std::move(transmit_x_mm)),
          receive_y_mm_(std::move(receive_y_mm)) {
        if (!(width_mm_ > 0.0) || !(height_mm_ > 0.0)) {
            throw InvalidArgument("PatchLayout: patch dimensions must be positive");
        }
        if (transmit_x_mm_.empty() || receive_y_mm_.empty()) {
            throw InvalidArgument("PatchLayout: at least one electrode per axis required");
        }
        check_axis(transmit_x_mm_, width_mm_, "transmit_x_mm");
        check_axis(receive_y_mm_, height_mm_, "receive_y_mm");
    }

    double width_mm() const { return width_mm_; }
    double height_mm() const { return height_mm_; }
    const std::vector<double>& transmit_x_mm() const { return transmit_x_mm_; }
    const std::vector<double>& receive_y_mm() const { return receive_y_mm_; }

    std::size_t sensor_count() const { return transmit_x_mm_.size() * receive_y_mm_.size(); }

    /// True when the point lies in the patch rectangle (borders included).
    bool contains(Vec2 p) const {
        return p.x >= 0.0 && p.x <= width_mm_ && p.y >= 0.0 && p.y <= height_mm_;
    }

private:
    static void check_axis(const std::vector<double>& v, double limit, const char* name) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!(v[i] > 0.0 && v[i] < limit)) {
                throw InvalidArgument(std::string("PatchLayout: ") + name +
                                      " coordinates must lie strictly inside the patch");
            }
            if (i > 0 && !(v[i] > v[i - 1])) {
                throw InvalidArgument(std::string("PatchLayout: ") + name +
                                      " must be strictly increasing");
            }
        }
    }

    double width_mm_;
    double height_mm_;
    std::vector<double> transmit_x_mm_;
    std::vector<double> receive_y_mm_;
};

/// Sensor positions of a layout, indexed by sensor id. Ids run transmit-major
/// with receive coordinates taken top-to-bottom (descending y), matching the
/// physical numbering of the stock patches: id 0 is the crossing of the first
/// transmit electrode with the topmost receive electrode.
struct SensorSet {
    std::vector<Vec2> positions_mm;  // index == sensor id

    std::size_t size() const { return positions_mm.size(); }
};

inline SensorSet sensor_set(const PatchLayout& layout) {
    SensorSet set;
    set.positions_mm.reserve(layout.sensor_count());
    const auto& ry = layout.receive_y_mm();
    for (double tx : layout.transmit_x_mm()) {
        for (auto it = ry.rbegin(); it != ry.rend(); ++it) {
            set.positions_mm.push_back({tx, *it});
        }
    }
    return set;
}

/// Probe positions arranged rows x cols, row-major: row index moves along y,
/// column index along x.
struct ProbePlan {
    int rows = 0;
    int cols = 0;
    std::vector<Vec2> locations_mm;

    Vec2 at(int r, int c) const {
        return locations_mm[static_cast<std::size_t>(r) * cols + c];
    }
    std::size_t size() const { return locations_mm.size(); }
};

/// Equispaced cell-centered probe grid covering the patch: each position is
/// the center of one of rows x cols grid cells, leaving a half-cell margin at
/// every edge so all probes land strictly on-patch.
inline ProbePlan uniform_probe_plan(const PatchLayout& layout, int rows, int cols) {
    if (rows < 2 || cols < 2) {
        throw InvalidArgument("uniform_probe_plan requires rows >= 2 and cols >= 2 "
                              "(interpolation needs at least 2 nodes per axis)");
    }
    ProbePlan plan;
    plan.rows = rows;
    plan.cols = cols;
    plan.locations_mm.reserve(static_cast<std::size_t>(rows) * cols);
    const double cw = layout.width_mm() / cols;
    const double ch = layout.height_mm() / rows;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            plan.locations_mm.push_back({(c + 0.5) * cw, (r + 0.5) * ch});
        }
    }
    return plan;
}

/// 25.4 x 152.4 mm patch with 11 evenly pitched transmit electrodes (13.5 mm)
/// and 2 receive electrodes 10 mm apart: 22 sensors.
inline PatchLayout make_patch_a() {
    std::vector<double> tx;
    for (int i = 0; i < 11; ++i) tx.push_back((87 + 135 * i) / 10.0);  // centered 135 mm span
    return PatchLayout(152.4, 25.4, std::move(tx), {7.7, 17.7});
}

namespace detail {
inline const std::vector<double>& patch_b_default_transmit_x() {
    // Irregular fixture: anchors at 5.5 / 148.4 mm, every gap within
    // [3.2, 28.6] mm. Interior values are a representative choice; the real
    // patch conceals them.
    static const std::vector<double> tx = {5.5,  8.7,  15.1, 43.7,  53.4,
                                           67.6, 90.5, 95.3, 123.9, 148.4};
    return tx;
}
}  // namespace detail

/// 25.4 x 152.4 mm patch with 10 irregularly spaced transmit electrodes and
/// 3 receive electrodes pitched 6.3 mm: 30 sensors. A custom transmit list may
/// be supplied; it must keep the end anchors and the [3.2, 28.6] mm gap range
/// that define this patch.
inline PatchLayout make_patch_b(std::vector<double> transmit_x_mm =
                                    detail::patch_b_default_transmit_x()) {
    if (transmit_x_mm.size() != 10) {
        throw InvalidArgument("make_patch_b: expected exactly 10 transmit electrodes");
    }
    if (transmit_x_mm.front() != 5.5 || transmit_x_mm.back() != 148.4) {
        throw InvalidArgument("make_patch_b: transmit anchors must be 5.5 and 148.4 mm");
    }
    for (std::size_t i = 1; i < transmit_x_mm.size(); ++i) {
        const double gap = transmit_x_mm[i] - transmit_x_mm[i - 1];
        if (gap < 3.2 - 1e-9 || gap > 28.6 + 1e-9) {
            throw InvalidArgument("make_patch_b: electrode gaps must lie in [3.2, 28.6] mm");
        }
    }
    return PatchLayout(152.4, 25.4, std::move(transmit_x_mm), {7.2, 13.5, 19.8});
}

}  // namespace caploc
