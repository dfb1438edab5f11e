#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "caploc/errors.hpp"

namespace caploc {

/// One-dimensional C2 cubic interpolating spline with not-a-knot end
/// conditions (the end polynomial pairs share their third derivative, so no
/// artificial flattening at the boundary). Degenerate knot counts fall back
/// to the unique lower-order interpolant: a line for n = 2, a parabola for
/// n = 3. Knots must be strictly increasing.
///
/// Internally solves the tridiagonal system for the node slopes s_i, then
/// stores per-interval Hermite coefficients. Evaluation outside the knot
/// range extrapolates with the end interval's cubic.
class CubicSpline {
public:
    CubicSpline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2) throw InvalidArgument("CubicSpline: need at least 2 knots");
        if (y_.size() != n) throw InvalidArgument("CubicSpline: x/y size mismatch");
        for (std::size_t i = 1; i < n; ++i) {
            if (!(x_[i] > x_[i - 1])) {
                throw InvalidArgument("CubicSpline: knots must be strictly increasing");
            }
        }
        compute_slopes();
        c2_.resize(n - 1);
        c3_.resize(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double h = x_[i + 1] - x_[i];
            const double del = (y_[i + 1] - y_[i]) / h;
            c2_[i] = (3.0 * del - 2.0 * s_[i] - s_[i + 1]) / h;
            c3_[i] = (s_[i] + s_[i + 1] - 2.0 * del) / (h * h);
        }
    }

    double operator()(double x) const { return eval_on(interval_of(x), x); }

    /// Evaluate at ascending abscissae; linear scan over intervals.
    void eval_sorted(std::span<const double> xs, std::span<double> out) const {
        std::size_t k = 0;
        const std::size_t last = x_.size() - 2;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            while (k < last && xs[j] >= x_[k + 1]) ++k;
            out[j] = eval_on(k, xs[j]);
        }
    }

    const std::vector<double>& knots() const { return x_; }

private:
    std::size_t interval_of(double x) const {
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        const std::size_t idx = static_cast<std::size_t>(it - x_.begin());
        if (idx == 0) return 0;
        return std::min(idx - 1, x_.size() - 2);
    }

    double eval_on(std::size_t i, double x) const {
        const double t = x - x_[i];
        return y_[i] + t * (s_[i] + t * (c2_[i] + t * c3_[i]));
    }

    void compute_slopes() {
        const std::size_t n = x_.size();
        s_.assign(n, 0.0);
        if (n == 2) {
            s_[0] = s_[1] = (y_[1] - y_[0]) / (x_[1] - x_[0]);
            return;
        }
        if (n == 3) {
            // Unique parabola through the three points.
            const double d01 = (y_[1] - y_[0]) / (x_[1] - x_[0]);
            const double d12 = (y_[2] - y_[1]) / (x_[2] - x_[1]);
            const double d012 = (d12 - d01) / (x_[2] - x_[0]);
            for (std::size_t i = 0; i < 3; ++i) {
                s_[i] = d01 + d012 * (2.0 * x_[i] - x_[0] - x_[1]);
            }
            return;
        }

        std::vector<double> h(n - 1), del(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            del[i] = (y_[i + 1] - y_[i]) / h[i];
        }

        // Tridiagonal system in the slopes; not-a-knot boundary rows.
        std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0), rhs(n, 0.0);
        diag[0] = h[1];
        sup[0] = h[0] + h[1];
        rhs[0] = ((h[0] + 2.0 * sup[0]) * h[1] * del[0] + h[0] * h[0] * del[1]) / sup[0];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            sub[i] = h[i];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            sup[i] = h[i - 1];
            rhs[i] = 3.0 * (h[i] * del[i - 1] + h[i - 1] * del[i]);
        }
        const double hl = h[n - 2], hp = h[n - 3];
        sub[n - 1] = hl + hp;
        diag[n - 1] = hp;
        rhs[n - 1] = (hl * hl * del[n - 3] + (2.0 * sub[n - 1] + hl) * hp * del[n - 2]) /
                     sub[n - 1];

        // Thomas sweep.
        for (std::size_t i = 1; i < n; ++i) {
            const double f = sub[i] / diag[i - 1];
            diag[i] -= f * sup[i - 1];
            rhs[i] -= f * rhs[i - 1];
        }
        s_[n - 1] = rhs[n - 1] / diag[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) {
            s_[i] = (rhs[i] - sup[i] * s_[i + 1]) / diag[i];
        }
    }

    std::vector<double> x_, y_, s_, c2_, c3_;
};

/// Tensor-product bicubic interpolation on a rectilinear grid: a not-a-knot
/// cubic spline along x for every grid row, then along y. Reproduces the grid
/// values exactly at the nodes and is C2 over the grid hull.
class GridSpline2D {
public:
    /// values is row-major with ys.size() rows and xs.size() columns.
    GridSpline2D(std::vector<double> xs, std::vector<double> ys, std::vector<double> values)
        : xs_(std::move(xs)), ys_(std::move(ys)) {
        if (values.size() != xs_.size() * ys_.size()) {
            throw InvalidArgument("GridSpline2D: values size does not match grid");
        }
        row_splines_.reserve(ys_.size());
        for (std::size_t r = 0; r < ys_.size(); ++r) {
            std::vector<double> row(values.begin() + r * xs_.size(),
                                    values.begin() + (r + 1) * xs_.size());
            row_splines_.emplace_back(xs_, std::move(row));
        }
    }

    double operator()(double x, double y) const {
        std::vector<double> col(ys_.size());
        for (std::size_t r = 0; r < ys_.size(); ++r) col[r] = row_splines_[r](x);
        return CubicSpline(ys_, std::move(col))(y);
    }

    /// Evaluate on the Cartesian grid of ascending abscissae ex x ey.
    /// Result is row-major, ey.size() rows by ex.size() columns.
    std::vector<double> sample(std::span<const double> ex, std::span<const double> ey) const {
        const std::size_t nx = ex.size(), ny = ey.size(), rows = ys_.size();
        std::vector<double> stage(rows * nx);
        for (std::size_t r = 0; r < rows; ++r) {
            row_splines_[r].eval_sorted(ex, std::span(stage).subspan(r * nx, nx));
        }
        std::vector<double> out(ny * nx);
        std::vector<double> col(rows), colv(ny);
        for (std::size_t j = 0; j < nx; ++j) {
            for (std::size_t r = 0; r < rows; ++r) col[r] = stage[r * nx + j];
            CubicSpline cs(ys_, col);
            cs.eval_sorted(ey, colv);
            for (std::size_t i = 0; i < ny; ++i) out[i * nx + j] = colv[i];
        }
        return out;
    }

    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& ys() const { return ys_; }

private:
    std::vector<double> xs_, ys_;
    std::vector<CubicSpline> row_splines_;
};

}  // namespace caploc
