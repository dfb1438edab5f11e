#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "caploc/geometry.hpp"
#include "caploc/metrics.hpp"
#include "support.hpp"

using namespace caploc;
using Catch::Matchers::WithinAbs;

namespace {

PointLog log_with(std::vector<double> readings) {
    PointLog log;
    log.readings = std::move(readings);
    return log;
}

Prediction pred(int id, double x, double y) {
    Prediction p;
    p.sensor_id = id;
    p.position_mm = {x, y};
    p.support_count = 1;
    p.eta = 0.65;
    return p;
}

}  // namespace

TEST_CASE("SNR fixtures") {
    // one sensor, baseline mean 500 and sample std 4
    const std::vector<std::vector<double>> baseline = {{496.0, 500.0, 504.0}};

    SECTION("excursion equal to sigma0 gives 0 dB") {
        const auto report = compute_snr(baseline, std::vector<PointLog>{log_with({504.0})});
        REQUIRE(report.per_sensor[0].valid);
        CHECK_THAT(report.per_sensor[0].snr_db, WithinAbs(0.0, 1e-9));
    }
    SECTION("excursion of 100 sigma0 gives 40 dB") {
        const auto report = compute_snr(baseline, std::vector<PointLog>{log_with({900.0})});
        CHECK_THAT(report.per_sensor[0].snr_db, WithinAbs(40.0, 1e-9));
    }
    SECTION("S0=500, sigma0=4, peak 700 gives 20 log10(50) dB") {
        const auto report = compute_snr(baseline, std::vector<PointLog>{log_with({700.0})});
        CHECK_THAT(report.per_sensor[0].snr_db, WithinAbs(33.979400086720375, 1e-9));
        CHECK_THAT(report.mean_db, WithinAbs(33.979400086720375, 1e-9));
        CHECK(report.valid_count == 1);
    }
    SECTION("the peak is the max over logs") {
        const std::vector<PointLog> logs = {log_with({600.0}), log_with({700.0}),
                                            log_with({650.0})};
        const auto report = compute_snr(baseline, logs);
        CHECK_THAT(report.per_sensor[0].snr_db, WithinAbs(33.979400086720375, 1e-9));
    }
}

TEST_CASE("SNR undefined cases are reported, not thrown") {
    SECTION("zero baseline spread") {
        const auto report = compute_snr({{500.0, 500.0}}, std::vector<PointLog>{log_with({900.0})});
        CHECK_FALSE(report.per_sensor[0].valid);
        CHECK(report.per_sensor[0].issue == "zero no-contact deviation");
        CHECK(report.valid_count == 0);
        CHECK(std::isnan(report.mean_db));
    }
    SECTION("non-positive excursion") {
        const auto report = compute_snr({{496.0, 500.0, 504.0}},
                                        std::vector<PointLog>{log_with({400.0})});
        CHECK_FALSE(report.per_sensor[0].valid);
        CHECK(report.per_sensor[0].issue == "non-positive signal excursion");
    }
    SECTION("mean skips undefined sensors") {
        const std::vector<std::vector<double>> baseline = {{496.0, 500.0, 504.0},
                                                           {100.0, 100.0}};
        const auto report = compute_snr(baseline, std::vector<PointLog>{log_with({700.0, 50.0})});
        CHECK(report.valid_count == 1);
        CHECK_THAT(report.mean_db, WithinAbs(33.979400086720375, 1e-9));
    }
}

TEST_CASE("SNR preconditions") {
    CHECK_THROWS_AS(compute_snr({{1.0}}, std::vector<PointLog>{log_with({2.0})}),
                    InvalidArgument);  // one baseline sample
    CHECK_THROWS_AS(compute_snr({{1.0, 2.0}}, std::vector<PointLog>{}), InvalidArgument);
    CHECK_THROWS_AS(compute_snr({{1.0, 2.0}}, std::vector<PointLog>{log_with({2.0, 3.0})}),
                    DataError);  // sensor count mismatch
}

TEST_CASE("SNR is invariant under scaling and translation of raw samples") {
    testsupport::Gen gen(909);
    for (int rep = 0; rep < 1000; ++rep) {
        const int n_sensors = gen.uniform_int(1, 4);
        const int n_base = gen.uniform_int(2, 8);
        std::vector<std::vector<double>> baseline(n_sensors);
        for (auto& b : baseline) {
            for (int i = 0; i < n_base; ++i) b.push_back(gen.uniform(100.0, 200.0));
        }
        std::vector<PointLog> logs(2);
        for (auto& log : logs) {
            for (int i = 0; i < n_sensors; ++i) log.readings.push_back(gen.uniform(150.0, 400.0));
        }
        const auto ref = compute_snr(baseline, logs);

        const double k = gen.uniform(0.01, 50.0);
        const double c = gen.uniform(-500.0, 500.0);
        auto baseline2 = baseline;
        auto logs2 = logs;
        for (auto& b : baseline2) {
            for (double& v : b) v = k * v + c;
        }
        for (auto& log : logs2) {
            for (double& v : log.readings) v = k * v + c;
        }
        const auto scaled = compute_snr(baseline2, logs2);
        for (int i = 0; i < n_sensors; ++i) {
            REQUIRE(ref.per_sensor[i].valid == scaled.per_sensor[i].valid);
            if (ref.per_sensor[i].valid) {
                CHECK_THAT(scaled.per_sensor[i].snr_db, WithinAbs(ref.per_sensor[i].snr_db, 1e-9));
            }
        }
    }
}

TEST_CASE("error stats fixtures") {
    const PatchLayout b = make_patch_b();
    const SensorSet truth = sensor_set(b);

    SECTION("first sensor, prediction 1.5 mm off") {
        const std::vector<Prediction> ps = {pred(0, 5.5, 21.3)};  // truth (5.5, 19.8)
        const ErrorStats stats = error_stats(ps, truth);
        CHECK_THAT(stats.per_sensor_error_mm[0], WithinAbs(1.5, 1e-9));
        CHECK_THAT(stats.sigma_pe_mm, WithinAbs(0.0, 1e-12));  // single sensor
        CHECK_THAT(stats.mean_error_mm, WithinAbs(1.5, 1e-9));
    }
    SECTION("last sensor, diagonal offset") {
        const std::vector<Prediction> ps = {pred(29, 148.8, 7.4)};  // truth (148.4, 7.2)
        const ErrorStats stats = error_stats(ps, truth);
        CHECK_THAT(stats.per_sensor_error_mm[0], WithinAbs(std::sqrt(0.2), 1e-9));
    }
    SECTION("exact predictions give zero stats") {
        std::vector<Prediction> ps;
        for (int i = 0; i < 30; ++i) {
            ps.push_back(pred(i, truth.positions_mm[i].x, truth.positions_mm[i].y));
        }
        const ErrorStats stats = error_stats(ps, truth);
        CHECK(stats.mean_error_mm == 0.0);
        CHECK(stats.sigma_pe_mm == 0.0);
        CHECK(stats.rms_error_mm == 0.0);
    }
}

TEST_CASE("error stats structural checks") {
    const SensorSet truth = sensor_set(make_patch_b());
    CHECK_THROWS_AS(error_stats(std::vector<Prediction>{}, truth), InvalidArgument);
    CHECK_THROWS_AS(error_stats(std::vector<Prediction>{pred(30, 0, 0)}, truth), DataError);
    CHECK_THROWS_AS(error_stats(std::vector<Prediction>{pred(3, 0, 0), pred(3, 1, 1)}, truth),
                    DataError);
}

TEST_CASE("error stats are symmetric in predicted and true positions") {
    testsupport::Gen gen(1234);
    for (int rep = 0; rep < 1000; ++rep) {
        const int n = gen.uniform_int(1, 8);
        SensorSet truth;
        std::vector<Prediction> ps;
        for (int i = 0; i < n; ++i) {
            truth.positions_mm.push_back({gen.uniform(0.0, 100.0), gen.uniform(0.0, 25.0)});
            ps.push_back(pred(i, gen.uniform(0.0, 100.0), gen.uniform(0.0, 25.0)));
        }
        const ErrorStats forward = error_stats(ps, truth);

        SensorSet truth_swapped;
        std::vector<Prediction> ps_swapped;
        for (int i = 0; i < n; ++i) {
            truth_swapped.positions_mm.push_back(ps[i].position_mm);
            ps_swapped.push_back(pred(i, truth.positions_mm[i].x, truth.positions_mm[i].y));
        }
        const ErrorStats backward = error_stats(ps_swapped, truth_swapped);
        for (int i = 0; i < n; ++i) {
            CHECK(forward.per_sensor_error_mm[i] == backward.per_sensor_error_mm[i]);
        }
        CHECK(forward.sigma_pe_mm == backward.sigma_pe_mm);
    }
}

TEST_CASE("sigma_pe and rms disagree only through the mean") {
    // errors {3, 4}: mean 3.5, population sigma 0.5, rms sqrt(12.5)
    SensorSet truth;
    truth.positions_mm = {{0.0, 0.0}, {10.0, 0.0}};
    const std::vector<Prediction> ps = {pred(0, 3.0, 0.0), pred(1, 14.0, 0.0)};
    const ErrorStats stats = error_stats(ps, truth);
    CHECK_THAT(stats.mean_error_mm, WithinAbs(3.5, 1e-12));
    CHECK_THAT(stats.sigma_pe_mm, WithinAbs(0.5, 1e-12));
    CHECK_THAT(stats.rms_error_mm, WithinAbs(std::sqrt(12.5), 1e-12));
}
