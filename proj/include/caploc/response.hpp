#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "caploc/errors.hpp"

namespace caploc {

/// Distance -> reading curve of one mutual-capacitance sensor, plus its
/// per-sample noise level. The mean response is a Lorentzian-style decay
///
///     S(d) = baseline + amplitude / (1 + (d / half_distance_mm)^2)
///
/// which is smooth, strictly decreasing for amplitude > 0, and approaches
/// baseline asymptotically. half_distance_mm is the distance at which the
/// excursion falls to half its peak.
struct ResponseModel {
    double baseline = 0.0;          // no-contact reading
    double amplitude = 0.0;         // peak excursion above baseline at d = 0
    double half_distance_mm = 1.0;  // d where the excursion is amplitude / 2
    double noise_sigma = 0.0;       // per-sample Gaussian noise sigma

    void validate() const {
        if (!(amplitude >= 0.0)) throw InvalidArgument("ResponseModel: amplitude must be >= 0");
        if (!(half_distance_mm > 0.0)) {
            throw InvalidArgument("ResponseModel: half_distance_mm must be > 0");
        }
        if (!(noise_sigma >= 0.0)) throw InvalidArgument("ResponseModel: noise_sigma must be >= 0");
    }
};

inline double mean_response(const ResponseModel& model, double distance_mm) {
    if (!(distance_mm >= 0.0)) throw InvalidArgument("mean_response: distance must be >= 0");
    const double q = distance_mm / model.half_distance_mm;
    return model.baseline + model.amplitude / (1.0 + q * q);
}

/// Calibration target for the stock noise floor, in dB.
inline constexpr double kDefaultSnrDb = 64.7;

/// Stock simulator model. Readings are baseline-subtracted excursions
/// (baseline 0), so the relative threshold filter downstream isolates the
/// response spike. noise_sigma is set so a probe resting on a sensor yields
/// roughly kDefaultSnrDb of signal-to-noise; half_distance was calibrated so
/// the threshold sweep's error minimum sits at eta = 0.65.
inline ResponseModel default_response_model() {
    ResponseModel m;
    m.baseline = 0.0;
    m.amplitude = 200.0;
    m.half_distance_mm = 5.0;
    m.noise_sigma = m.amplitude * std::pow(10.0, -kDefaultSnrDb / 20.0);
    return m;
}

/// One probe touch at a known distance from a sensor.
struct CalibrationSample {
    double distance_mm = 0.0;
    double reading = 0.0;
};

namespace detail {

/// Solve the 3x3 system a * x = b in place, partial pivoting.
/// Returns false when the pivot collapses (singular system).
inline bool solve3(std::array<std::array<double, 3>, 3>& a, std::array<double, 3>& b,
                   std::array<double, 3>& x) {
    std::array<int, 3> idx = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::fabs(a[idx[r]][col]) > std::fabs(a[idx[piv]][col])) piv = r;
        }
        std::swap(idx[col], idx[piv]);
        const double p = a[idx[col]][col];
        if (std::fabs(p) < 1e-300) return false;
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[idx[r]][col] / p;
            for (int c = col; c < 3; ++c) a[idx[r]][c] -= f * a[idx[col]][c];
            b[idx[r]] -= f * b[idx[col]];
        }
    }
    for (int row = 2; row >= 0; --row) {
        double s = b[idx[row]];
        for (int c = row + 1; c < 3; ++c) s -= a[idx[row]][c] * x[c];
        x[row] = s / a[idx[row]][row];
    }
    return true;
}

inline double fit_ssr(std::span<const CalibrationSample> samples, double s0, double a,
                      double d0) {
    double ssr = 0.0;
    for (const auto& s : samples) {
        const double q = s.distance_mm / d0;
        const double r = s0 + a / (1.0 + q * q) - s.reading;
        ssr += r * r;
    }
    return ssr;
}

}  // namespace detail

/// Least-squares fit of (baseline, amplitude, half_distance) to calibration
/// samples, Levenberg-Marquardt with an analytic Jacobian. half_distance is
/// optimized in log space to stay positive; amplitude is clamped to >= 0 at
/// the end (if the data prefers a negative amplitude the constrained optimum
/// is the flat model at the sample mean). Stops on relative parameter change
/// < 1e-8 or after 500 iterations; the returned residual never exceeds the
/// initial model's. noise_sigma of the result is the dof-corrected residual
/// RMS, sqrt(SSR / max(n - 3, 1)).
inline ResponseModel fit_response_model(std::span<const CalibrationSample> samples,
                                        const ResponseModel& initial) {
    if (samples.size() < 4) {
        throw InvalidArgument("fit_response_model requires at least 4 samples");
    }
    initial.validate();
    double dmin = samples[0].distance_mm, dmax = samples[0].distance_mm;
    for (const auto& s : samples) {
        if (!(s.distance_mm >= 0.0)) {
            throw InvalidArgument("fit_response_model: distances must be >= 0");
        }
        dmin = std::min(dmin, s.distance_mm);
        dmax = std::max(dmax, s.distance_mm);
    }
    if (dmax - dmin <= 0.0) {
        throw DataError("fit_response_model: all samples share one distance; "
                        "half_distance_mm is unidentifiable");
    }

    const std::size_t n = samples.size();
    double s0 = initial.baseline;
    double a = std::max(initial.amplitude, 1e-12);  // keep the d0 column alive
    double ld = std::log(initial.half_distance_mm);

    double ssr = detail::fit_ssr(samples, s0, a, std::exp(ld));
    double lambda = 1e-3;
    for (int iter = 0; iter < 500; ++iter) {
        const double d0 = std::exp(ld);
        // Normal equations J^T J and J^T r for r_j = model(d_j) - y_j.
        std::array<std::array<double, 3>, 3> jtj{};
        std::array<double, 3> jtr{};
        for (const auto& s : samples) {
            const double w = (s.distance_mm / d0) * (s.distance_mm / d0);
            const double u = 1.0 / (1.0 + w);
            const double r = s0 + a * u - s.reading;
            const std::array<double, 3> j = {1.0, u, 2.0 * a * w * u * u};  // d/d(ln d0)
            for (int p = 0; p < 3; ++p) {
                for (int q = p; q < 3; ++q) jtj[p][q] += j[p] * j[q];
                jtr[p] += j[p] * r;
            }
        }
        for (int p = 0; p < 3; ++p) {
            for (int q = 0; q < p; ++q) jtj[p][q] = jtj[q][p];
        }

        bool accepted = false;
        double rel_change = 0.0;
        for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
            auto damped = jtj;
            for (int p = 0; p < 3; ++p) damped[p][p] += lambda * std::max(jtj[p][p], 1e-12);
            std::array<double, 3> rhs = {-jtr[0], -jtr[1], -jtr[2]};
            std::array<double, 3> step{};
            if (!detail::solve3(damped, rhs, step)) {
                lambda *= 4.0;
                continue;
            }
            const double ns0 = s0 + step[0];
            const double na = a + step[1];
            const double nld = ld + step[2];
            const double nssr = detail::fit_ssr(samples, ns0, na, std::exp(nld));
            if (nssr <= ssr) {
                rel_change = std::max({std::fabs(step[0]) / (std::fabs(s0) + 1e-12),
                                       std::fabs(step[1]) / (std::fabs(a) + 1e-12),
                                       std::fabs(step[2]) / (std::fabs(ld) + 1e-12)});
                s0 = ns0;
                a = na;
                ld = nld;
                ssr = nssr;
                lambda = std::max(lambda * 0.3, 1e-12);
                accepted = true;
            } else {
                lambda *= 4.0;
            }
        }
        if (!accepted || rel_change < 1e-8) break;
    }

    ResponseModel out;
    if (a < 0.0) {
        // Constrained optimum on the amplitude >= 0 boundary: flat model.
        double mean = 0.0;
        for (const auto& s : samples) mean += s.reading;
        mean /= static_cast<double>(n);
        out.baseline = mean;
        out.amplitude = 0.0;
        out.half_distance_mm = initial.half_distance_mm;
        ssr = detail::fit_ssr(samples, out.baseline, 0.0, out.half_distance_mm);
    } else {
        out.baseline = s0;
        out.amplitude = a;
        out.half_distance_mm = std::exp(ld);
    }
    out.noise_sigma = std::sqrt(ssr / static_cast<double>(std::max<std::size_t>(n - 3, 1)));
    return out;
}

}  // namespace caploc
