#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "caploc/errors.hpp"
#include "caploc/geometry.hpp"
#include "caploc/localize.hpp"
#include "caploc/simulate.hpp"

namespace caploc {

struct SnrEntry {
    int sensor_id = 0;
    double snr_db = std::numeric_limits<double>::quiet_NaN();
    bool valid = false;
    std::string issue;  // set when the ratio is undefined for this sensor
};

struct SnrReport {
    std::vector<SnrEntry> per_sensor;
    double mean_db = std::numeric_limits<double>::quiet_NaN();  // over valid entries
    std::size_t valid_count = 0;
};

/// Per-sensor signal-to-noise ratio in dB:
///
///     SNR_i = 20 log10((max over logs of reading_i - S0_i) / sigma0_i)
///
/// with S0_i the mean and sigma0_i the sample (n-1) standard deviation of the
/// no-contact baseline samples. Sensors with zero baseline spread or a
/// non-positive excursion get an invalid entry with the reason recorded.
inline SnrReport compute_snr(const std::vector<std::vector<double>>& baseline_samples,
                             std::span<const PointLog> logs) {
    if (logs.empty()) throw InvalidArgument("compute_snr: need at least one point log");
    const std::size_t n = baseline_samples.size();
    if (n == 0) throw InvalidArgument("compute_snr: no baseline samples");
    for (const PointLog& log : logs) {
        if (log.readings.size() != n) {
            throw DataError("compute_snr: log readings count does not match sensor count");
        }
    }

    SnrReport report;
    report.per_sensor.resize(n);
    double mean_acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        SnrEntry& e = report.per_sensor[i];
        e.sensor_id = static_cast<int>(i);
        const std::vector<double>& base = baseline_samples[i];
        if (base.size() < 2) {
            throw InvalidArgument("compute_snr: sensor " + std::to_string(i) +
                                  " needs >= 2 baseline samples");
        }
        double s0 = 0.0;
        for (double v : base) s0 += v;
        s0 /= static_cast<double>(base.size());
        double var = 0.0;
        for (double v : base) var += (v - s0) * (v - s0);
        const double sigma0 = std::sqrt(var / static_cast<double>(base.size() - 1));

        double peak = -std::numeric_limits<double>::infinity();
        for (const PointLog& log : logs) peak = std::max(peak, log.readings[i]);
        const double excursion = peak - s0;

        if (sigma0 == 0.0) {
            e.issue = "zero no-contact deviation";
        } else if (!(excursion > 0.0)) {
            e.issue = "non-positive signal excursion";
        } else {
            e.snr_db = 20.0 * std::log10(excursion / sigma0);
            e.valid = true;
            mean_acc += e.snr_db;
            ++report.valid_count;
        }
    }
    if (report.valid_count > 0) {
        report.mean_db = mean_acc / static_cast<double>(report.valid_count);
    }
    return report;
}

struct ErrorStats {
    std::vector<double> per_sensor_error_mm;  // prediction order
    double mean_error_mm = 0.0;
    double sigma_pe_mm = 0.0;  // mean-centered population standard deviation
    double rms_error_mm = 0.0;
};

/// Euclidean distance of each prediction from its true sensor position plus
/// summary statistics. sigma_pe is the population (1/N) standard deviation of
/// the error list; the RMS about zero is reported alongside since both
/// readings of "standard deviation of prediction error" are defensible.
inline ErrorStats error_stats(std::span<const Prediction> predictions, const SensorSet& truth) {
    if (predictions.empty()) throw InvalidArgument("error_stats: no predictions");
    std::vector<char> used(truth.size(), 0);
    ErrorStats stats;
    stats.per_sensor_error_mm.reserve(predictions.size());
    for (const Prediction& p : predictions) {
        if (p.sensor_id < 0 || static_cast<std::size_t>(p.sensor_id) >= truth.size()) {
            throw DataError("error_stats: prediction for unknown sensor id " +
                            std::to_string(p.sensor_id));
        }
        if (used[p.sensor_id]) {
            throw DataError("error_stats: duplicate prediction for sensor id " +
                            std::to_string(p.sensor_id));
        }
        used[p.sensor_id] = 1;
        stats.per_sensor_error_mm.push_back(
            distance(p.position_mm, truth.positions_mm[p.sensor_id]));
    }

    const double n = static_cast<double>(stats.per_sensor_error_mm.size());
    double sum = 0.0, sum_sq = 0.0;
    for (double e : stats.per_sensor_error_mm) {
        sum += e;
        sum_sq += e * e;
    }
    stats.mean_error_mm = sum / n;
    stats.rms_error_mm = std::sqrt(sum_sq / n);
    double var = 0.0;
    for (double e : stats.per_sensor_error_mm) {
        var += (e - stats.mean_error_mm) * (e - stats.mean_error_mm);
    }
    stats.sigma_pe_mm = std::sqrt(var / n);
    return stats;
}

}  // namespace caploc
