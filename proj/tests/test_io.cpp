#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "caploc/geometry.hpp"
#include "caploc/io.hpp"
#include "caploc/response.hpp"
#include "caploc/simulate.hpp"
#include "caploc/sweeps.hpp"
#include "support.hpp"

using namespace caploc;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using testsupport::TempDir;
using testsupport::slurp;

TEST_CASE("point log CSV round trip is bit-exact") {
    TempDir dir;
    const PatchLayout b = make_patch_b();
    ResponseModel m = default_response_model();
    const auto plan = uniform_probe_plan(b, 3, 7);
    const auto logs = simulate_acquisition(b, m, plan, 5, 1.0, 123);

    const auto path = dir.file("logs.csv");
    io::write_point_logs_csv(path, logs);
    const auto parsed = io::read_point_logs_csv(path);
    REQUIRE(parsed.size() == logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i) {
        CHECK(parsed[i].probe_mm == logs[i].probe_mm);
        CHECK(parsed[i].readings == logs[i].readings);
        CHECK(parsed[i].n_samples == 1);
    }
    // write -> read -> write fixpoint
    CHECK(io::point_logs_to_csv(parsed) == slurp(path));
}

TEST_CASE("point log CSV validation") {
    TempDir dir;
    const auto path = dir.file("bad.csv");

    io::atomic_write_file(path, "probe_x_mm,probe_y_mm\n1,2\n");
    CHECK_THROWS_WITH(io::read_point_logs_csv(path), ContainsSubstring("expected header"));

    io::atomic_write_file(path, "probe_x_mm,probe_y_mm,s0,s2\n1,2,3,4\n");
    CHECK_THROWS_WITH(io::read_point_logs_csv(path), ContainsSubstring("s0,s1,..."));

    io::atomic_write_file(path, "probe_x_mm,probe_y_mm,s0\n1,2\n");
    CHECK_THROWS_WITH(io::read_point_logs_csv(path), ContainsSubstring("line 2"));

    io::atomic_write_file(path, "probe_x_mm,probe_y_mm,s0\n1,2,abc\n");
    CHECK_THROWS_WITH(io::read_point_logs_csv(path), ContainsSubstring("not a number"));

    CHECK_THROWS_AS(io::read_point_logs_csv(dir.file("missing.csv")), IoError);
}

TEST_CASE("calibration CSV round trip") {
    TempDir dir;
    const std::vector<CalibrationSample> samples = {{0.0, 1200.0}, {2.5, 1150.3}, {10.0, 1100.0}};
    const auto path = dir.file("cal.csv");
    io::write_calibration_csv(path, samples);
    const auto parsed = io::read_calibration_csv(path);
    REQUIRE(parsed.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(parsed[i].distance_mm == samples[i].distance_mm);
        CHECK(parsed[i].reading == samples[i].reading);
    }
    CHECK(io::calibration_to_csv(parsed) == slurp(path));
}

TEST_CASE("prediction CSV round trip") {
    TempDir dir;
    std::vector<Prediction> preds;
    testsupport::Gen gen(55);
    for (int i = 0; i < 12; ++i) {
        Prediction p;
        p.sensor_id = i;
        p.position_mm = {gen.uniform(0.0, 152.4), gen.uniform(0.0, 25.4)};
        p.support_count = static_cast<std::size_t>(gen.uniform_int(1, 100000));
        p.eta = 0.65;
        preds.push_back(p);
    }
    const auto path = dir.file("pred.csv");
    io::write_predictions_csv(path, preds);
    const auto parsed = io::read_predictions_csv(path);
    REQUIRE(parsed.size() == preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        CHECK(parsed[i].sensor_id == preds[i].sensor_id);
        CHECK(parsed[i].position_mm == preds[i].position_mm);
        CHECK(parsed[i].support_count == preds[i].support_count);
        CHECK(parsed[i].eta == preds[i].eta);
    }
    CHECK(io::predictions_to_csv(parsed) == slurp(path));
}

TEST_CASE("snr and sweep CSV round trips") {
    TempDir dir;

    SnrReport report;
    for (int i = 0; i < 5; ++i) {
        SnrEntry e;
        e.sensor_id = i;
        e.valid = i != 3;
        e.snr_db = 60.0 + i * 0.7;
        if (!e.valid) e.issue = "zero no-contact deviation";
        report.per_sensor.push_back(e);
    }
    const auto snr_path = dir.file("snr.csv");
    io::write_snr_csv(snr_path, report);
    const auto snr_rows = io::read_snr_csv(snr_path);
    REQUIRE(snr_rows.size() == 4);  // invalid sensor 3 has no row
    CHECK(snr_rows[0].first == 0);
    CHECK(snr_rows[3].first == 4);
    CHECK(snr_rows[1].second == 60.7);

    const PatchLayout b = make_patch_b();
    const std::vector<GridSize> grids = {{2, 4}, {3, 6}};
    const SweepResult sweep =
        sweep_point_log_count(b, default_response_model(), grids, 0.65, 4, 2, 9);
    const auto sweep_path = dir.file("sweep.csv");
    io::write_sweep_csv(sweep_path, sweep);
    const auto rows = io::read_sweep_csv(sweep_path);
    REQUIRE(rows.size() == 4);  // 2 cells x 2 trials
    CHECK(rows[0].param1 == 2);
    CHECK(rows[0].param2 == 4);
    CHECK(rows[0].trial == 0);
    CHECK(rows[1].trial == 1);
    CHECK(rows[0].sigma_pe_mm == sweep.cells[0].trials[0].sigma_pe_mm);

    // write -> read -> write fixpoint through the row representation
    SweepResult rebuilt;
    rebuilt.cells.resize(2);
    rebuilt.cells[0].param1 = rows[0].param1;
    rebuilt.cells[0].param2 = rows[0].param2;
    rebuilt.cells[1].param1 = rows[2].param1;
    rebuilt.cells[1].param2 = rows[2].param2;
    for (int c = 0; c < 2; ++c) {
        for (int t = 0; t < 2; ++t) {
            SweepTrial trial;
            trial.trial = rows[c * 2 + t].trial;
            trial.sigma_pe_mm = rows[c * 2 + t].sigma_pe_mm;
            rebuilt.cells[c].trials.push_back(trial);
        }
    }
    CHECK(io::sweep_to_csv(rebuilt) == slurp(sweep_path));
}

TEST_CASE("layout JSON round trip") {
    TempDir dir;
    const PatchLayout b = make_patch_b();
    const auto path = dir.file("layout.json");
    io::write_layout_json(path, b);
    const PatchLayout parsed = io::read_layout_json(path);
    CHECK_THAT(parsed.width_mm(), WithinAbs(b.width_mm(), 1e-12));
    CHECK_THAT(parsed.height_mm(), WithinAbs(b.height_mm(), 1e-12));
    REQUIRE(parsed.transmit_x_mm().size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK_THAT(parsed.transmit_x_mm()[i], WithinAbs(b.transmit_x_mm()[i], 1e-12));
    }
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK_THAT(parsed.receive_y_mm()[i], WithinAbs(b.receive_y_mm()[i], 1e-12));
    }
    // the second write is a byte fixpoint
    const auto path2 = dir.file("layout2.json");
    io::write_layout_json(path2, parsed);
    CHECK(io::layout_to_json(io::read_layout_json(path2)) == slurp(path2));
}

TEST_CASE("layout JSON validation") {
    TempDir dir;
    const auto path = dir.file("bad.json");
    io::atomic_write_file(path, "{\"width_cm\": 15.24}\n");
    CHECK_THROWS_AS(io::read_layout_json(path), DataError);
    io::atomic_write_file(path, "not json");
    CHECK_THROWS_AS(io::read_layout_json(path), DataError);
    io::atomic_write_file(path,
                          "{\"width_cm\": 15.24, \"height_cm\": 2.54, "
                          "\"transmit_x_cm\": [5.0, 1.0], \"receive_y_cm\": [0.72]}\n");
    CHECK_THROWS_AS(io::read_layout_json(path), DataError);  // decreasing transmit axis
}

TEST_CASE("probe grid inference") {
    const PatchLayout b = make_patch_b();
    const auto plan = uniform_probe_plan(b, 4, 9);
    auto logs = simulate_acquisition(b, default_response_model(), plan, 2, 0.0, 3);

    SECTION("uniform plans are recovered") {
        const ProbePlan inferred = io::infer_plan_from_logs(logs);
        CHECK(inferred.rows == 4);
        CHECK(inferred.cols == 9);
        REQUIRE(inferred.size() == plan.size());
        for (std::size_t i = 0; i < plan.size(); ++i) {
            CHECK(inferred.locations_mm[i] == plan.locations_mm[i]);
        }
    }
    SECTION("order independent") {
        std::mt19937_64 rng(4);
        std::shuffle(logs.begin(), logs.end(), rng);
        const ProbePlan inferred = io::infer_plan_from_logs(logs);
        CHECK(inferred.locations_mm == uniform_probe_plan(b, 4, 9).locations_mm);
    }
    SECTION("missing cell is irregular and named") {
        logs.erase(logs.begin() + 13);
        CHECK_THROWS_WITH(io::infer_plan_from_logs(logs),
                          ContainsSubstring("irregular probe grid"));
        try {
            io::infer_plan_from_logs(logs);
        } catch (const DataError& e) {
            CHECK_THAT(e.what(), ContainsSubstring("cell (1, 4)"));
        }
    }
    SECTION("duplicate cell is irregular") {
        logs[5] = logs[6];
        CHECK_THROWS_WITH(io::infer_plan_from_logs(logs),
                          ContainsSubstring("irregular probe grid"));
    }
    SECTION("sub-tolerance position noise is absorbed") {
        for (std::size_t i = 0; i < logs.size(); ++i) {
            logs[i].probe_mm.x += (i % 2 ? 1.0 : -1.0) * 1e-7;
        }
        const ProbePlan inferred = io::infer_plan_from_logs(logs);
        CHECK(inferred.rows == 4);
        CHECK(inferred.cols == 9);
    }
    SECTION("single-row grids cannot be localized") {
        std::vector<PointLog> row(logs.begin(), logs.begin() + 9);
        for (std::size_t i = 0; i < row.size(); ++i) {
            row[i].probe_mm = {static_cast<double>(i + 1), 5.0};
        }
        CHECK_THROWS_WITH(io::infer_plan_from_logs(row), ContainsSubstring("2x2"));
    }
}

TEST_CASE("atomic write replaces content and leaves no temp file") {
    TempDir dir;
    const auto path = dir.file("file.txt");
    io::atomic_write_file(path, "first");
    io::atomic_write_file(path, "second");
    CHECK(slurp(path) == "second");
    CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
}
