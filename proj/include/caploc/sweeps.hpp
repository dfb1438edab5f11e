#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "caploc/errors.hpp"
#include "caploc/geometry.hpp"
#include "caploc/localize.hpp"
#include "caploc/metrics.hpp"
#include "caploc/response.hpp"
#include "caploc/rng.hpp"
#include "caploc/simulate.hpp"

namespace caploc {

/// Seed of one (cell, trial) sweep run. Deterministic in its inputs, so
/// serial and parallel sweep execution agree bitwise, and decorrelated from
/// the per-location stream that simulate_acquisition derives internally.
inline std::uint64_t sweep_trial_seed(std::uint64_t base_seed, std::size_t cell_index,
                                      int trial) {
    return splitmix64(splitmix64(base_seed + 0x9E3779B97F4A7C15ULL * (cell_index + 1)) +
                      static_cast<std::uint64_t>(trial));
}

struct SweepTrial {
    int trial = 0;
    std::uint64_t seed = 0;
    double sigma_pe_mm = std::numeric_limits<double>::quiet_NaN();
    bool failed = false;
    std::string error;
};

struct SweepCell {
    double param1 = 0.0;
    double param2 = 0.0;
    std::vector<SweepTrial> trials;
    double mean_sigma_pe_mm = std::numeric_limits<double>::quiet_NaN();  // over ok trials
    std::size_t ok_count = 0;
};

struct SweepResult {
    std::string param1_name;
    std::string param2_name;
    std::vector<SweepCell> cells;
};

struct GridSize {
    int rows = 0;
    int cols = 0;
};

namespace detail {

inline void finish_cell(SweepCell& cell) {
    double acc = 0.0;
    for (const SweepTrial& t : cell.trials) {
        if (!t.failed) {
            acc += t.sigma_pe_mm;
            ++cell.ok_count;
        }
    }
    if (cell.ok_count > 0) cell.mean_sigma_pe_mm = acc / static_cast<double>(cell.ok_count);
}

/// One full acquisition -> localization -> error_stats pass. Any sensor
/// failure fails the trial (sigma_pe is defined over the full sensor set).
inline SweepTrial run_pipeline_trial(const PatchLayout& layout, const ResponseModel& model,
                                     const ProbePlan& plan, double eta, int pixels_per_cm,
                                     int n_samples, double probe_jitter_mm, int trial,
                                     std::uint64_t seed) {
    SweepTrial result;
    result.trial = trial;
    result.seed = seed;
    try {
        const auto logs =
            simulate_acquisition(layout, model, plan, n_samples, probe_jitter_mm, seed);
        const auto localized = localize_all(logs, plan, layout, eta, pixels_per_cm);
        std::vector<Prediction> predictions;
        predictions.reserve(localized.size());
        for (const SensorLocalization& s : localized) {
            if (!s.ok()) throw DataError("sensor " + std::to_string(s.sensor_id) + ": " + s.error);
            predictions.push_back(*s.prediction);
        }
        result.sigma_pe_mm = error_stats(predictions, sensor_set(layout)).sigma_pe_mm;
    } catch (const Error& e) {
        result.failed = true;
        result.error = e.what();
    }
    return result;
}

}  // namespace detail

/// Prediction error versus point-log quantity: for each probe grid size, run
/// `trials` seeded simulations through the full pipeline and record sigma_pe.
/// Seeds derive from (base seed, cell index, trial).
inline SweepResult sweep_point_log_count(const PatchLayout& layout, const ResponseModel& model,
                                         std::span<const GridSize> counts, double eta,
                                         int pixels_per_cm, int trials, std::uint64_t seed,
                                         int n_samples = 50, double probe_jitter_mm = 2.0) {
    if (counts.empty()) throw InvalidArgument("sweep_point_log_count: no grid sizes given");
    if (trials < 1) throw InvalidArgument("sweep_point_log_count: trials must be >= 1");
    for (const GridSize& g : counts) {
        if (g.rows < 2 || g.cols < 2) {
            throw InvalidArgument("sweep_point_log_count: every grid must be at least 2x2");
        }
    }

    SweepResult result;
    result.param1_name = "rows";
    result.param2_name = "cols";
    result.cells.reserve(counts.size());
    for (std::size_t cell_idx = 0; cell_idx < counts.size(); ++cell_idx) {
        const GridSize& g = counts[cell_idx];
        SweepCell cell;
        cell.param1 = g.rows;
        cell.param2 = g.cols;
        const ProbePlan plan = uniform_probe_plan(layout, g.rows, g.cols);
        for (int t = 0; t < trials; ++t) {
            cell.trials.push_back(detail::run_pipeline_trial(
                layout, model, plan, eta, pixels_per_cm, n_samples, probe_jitter_mm, t,
                sweep_trial_seed(seed, cell_idx, t)));
        }
        detail::finish_cell(cell);
        result.cells.push_back(std::move(cell));
    }
    return result;
}

/// Prediction error over the eta x resolution grid. Acquisition does not
/// depend on the swept parameters, so each trial's simulated logs (and each
/// sensor's point-log map and per-resolution interpolation) are shared across
/// cells: cells differ only in the swept values, and comparisons across the
/// grid are paired. Cell order is row-major over etas x resolutions.
inline SweepResult sweep_eta_resolution(const PatchLayout& layout, const ResponseModel& model,
                                        std::span<const double> etas,
                                        std::span<const int> resolutions, int trials,
                                        std::uint64_t seed, int rows = 5, int cols = 20,
                                        int n_samples = 50, double probe_jitter_mm = 2.0) {
    if (etas.empty() || resolutions.empty()) {
        throw InvalidArgument("sweep_eta_resolution: empty parameter axis");
    }
    if (trials < 1) throw InvalidArgument("sweep_eta_resolution: trials must be >= 1");
    for (double e : etas) {
        if (!(e > 0.0 && e <= 1.0)) {
            throw InvalidArgument("sweep_eta_resolution: eta values must lie in (0, 1]");
        }
    }
    for (int r : resolutions) {
        if (r < 1) throw InvalidArgument("sweep_eta_resolution: resolutions must be >= 1");
    }

    const ProbePlan plan = uniform_probe_plan(layout, rows, cols);
    const SensorSet truth = sensor_set(layout);
    const int n_sensors = static_cast<int>(truth.size());
    const std::size_t n_cells = etas.size() * resolutions.size();

    SweepResult result;
    result.param1_name = "eta";
    result.param2_name = "pixels_per_cm";
    result.cells.resize(n_cells);
    for (std::size_t ei = 0; ei < etas.size(); ++ei) {
        for (std::size_t ri = 0; ri < resolutions.size(); ++ri) {
            SweepCell& cell = result.cells[ei * resolutions.size() + ri];
            cell.param1 = etas[ei];
            cell.param2 = resolutions[ri];
        }
    }

    for (int t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = sweep_trial_seed(seed, 0, t);
        std::vector<std::vector<Prediction>> cell_preds(n_cells);
        std::vector<std::string> cell_error(n_cells);
        try {
            const auto logs =
                simulate_acquisition(layout, model, plan, n_samples, probe_jitter_mm, trial_seed);
            for (int id = 0; id < n_sensors; ++id) {
                const PointLogMap map = build_point_log_map(logs, plan, id);
                for (std::size_t ri = 0; ri < resolutions.size(); ++ri) {
                    const InterpolatedMap interp = interpolate(map, resolutions[ri]);
                    for (std::size_t ei = 0; ei < etas.size(); ++ei) {
                        const std::size_t cell_idx = ei * resolutions.size() + ri;
                        if (!cell_error[cell_idx].empty()) continue;
                        try {
                            cell_preds[cell_idx].push_back(localize_sensor(interp, etas[ei]));
                        } catch (const Error& e) {
                            cell_error[cell_idx] = e.what();
                        }
                    }
                }
            }
        } catch (const Error& e) {
            for (std::size_t i = 0; i < n_cells; ++i) cell_error[i] = e.what();
        }

        for (std::size_t cell_idx = 0; cell_idx < n_cells; ++cell_idx) {
            SweepTrial trial;
            trial.trial = t;
            trial.seed = trial_seed;
            if (!cell_error[cell_idx].empty()) {
                trial.failed = true;
                trial.error = cell_error[cell_idx];
            } else {
                trial.sigma_pe_mm = error_stats(cell_preds[cell_idx], truth).sigma_pe_mm;
            }
            result.cells[cell_idx].trials.push_back(std::move(trial));
        }
    }
    for (SweepCell& cell : result.cells) detail::finish_cell(cell);
    return result;
}

}  // namespace caploc
