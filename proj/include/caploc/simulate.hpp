#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "caploc/errors.hpp"
#include "caploc/geometry.hpp"
#include "caploc/response.hpp"
#include "caploc/rng.hpp"

namespace caploc {

/// One probe touch: the commanded probe position plus every sensor's reading,
/// each reading being the mean of n_samples raw samples.
struct PointLog {
    Vec2 probe_mm;
    std::vector<double> readings;  // index == sensor id
    int n_samples = 1;
};

/// Simulate one probe touch. The actual contact point is the commanded
/// position plus a uniform offset in a disc of radius probe_jitter_mm (drawn
/// once per touch); each sensor then reports the mean of n_samples draws of
/// mean_response(distance to sensor) + Gaussian(0, noise_sigma). Fully
/// deterministic for a fixed seed.
inline PointLog acquire_point_log(const PatchLayout& layout, const ResponseModel& model,
                                  Vec2 probe_mm, int n_samples, double probe_jitter_mm,
                                  std::uint64_t rng_seed) {
    model.validate();
    if (!layout.contains(probe_mm)) {
        throw InvalidArgument("acquire_point_log: probe position lies outside the patch");
    }
    if (n_samples < 1) throw InvalidArgument("acquire_point_log: n_samples must be >= 1");
    if (!(probe_jitter_mm >= 0.0)) {
        throw InvalidArgument("acquire_point_log: probe_jitter_mm must be >= 0");
    }

    Rng rng(rng_seed);
    Vec2 contact = probe_mm;
    if (probe_jitter_mm > 0.0) {
        const auto [dx, dy] = rng.disc(probe_jitter_mm);
        contact = {contact.x + dx, contact.y + dy};  // may slip off-patch; physical
    }

    const SensorSet sensors = sensor_set(layout);
    PointLog log;
    log.probe_mm = probe_mm;
    log.n_samples = n_samples;
    log.readings.reserve(sensors.size());
    for (const Vec2& pos : sensors.positions_mm) {
        const double mean = mean_response(model, distance(contact, pos));
        double reading = mean;
        if (model.noise_sigma > 0.0) {
            double acc = 0.0;
            for (int k = 0; k < n_samples; ++k) acc += rng.gaussian();
            reading += model.noise_sigma * acc / n_samples;
        }
        log.readings.push_back(reading);
    }
    return log;
}

/// Acquire a point log at every plan location, in plan order. Location i uses
/// location_seed(rng_seed, i), so runs are reproducible and independent of
/// evaluation order.
inline std::vector<PointLog> simulate_acquisition(const PatchLayout& layout,
                                                  const ResponseModel& model,
                                                  const ProbePlan& plan, int n_samples,
                                                  double probe_jitter_mm,
                                                  std::uint64_t rng_seed) {
    if (plan.locations_mm.empty()) {
        throw InvalidArgument("simulate_acquisition: probe plan is empty");
    }
    std::vector<PointLog> logs;
    logs.reserve(plan.size());
    for (std::size_t i = 0; i < plan.locations_mm.size(); ++i) {
        logs.push_back(acquire_point_log(layout, model, plan.locations_mm[i], n_samples,
                                         probe_jitter_mm, location_seed(rng_seed, i)));
    }
    return logs;
}

/// Raw no-contact samples per sensor (n_samples each): baseline plus noise.
/// Feeds the sigma_0 / S_0 terms of the SNR computation.
inline std::vector<std::vector<double>> simulate_baseline(const PatchLayout& layout,
                                                          const ResponseModel& model,
                                                          int n_samples,
                                                          std::uint64_t rng_seed) {
    model.validate();
    if (n_samples < 1) throw InvalidArgument("simulate_baseline: n_samples must be >= 1");
    Rng rng(rng_seed);
    std::vector<std::vector<double>> out(layout.sensor_count());
    for (auto& sensor_samples : out) {
        sensor_samples.reserve(n_samples);
        for (int k = 0; k < n_samples; ++k) {
            sensor_samples.push_back(model.baseline + model.noise_sigma * rng.gaussian());
        }
    }
    return out;
}

}  // namespace caploc
