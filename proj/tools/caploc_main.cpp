// caploc: simulate, fit, localize, and evaluate concealed-sensor capacitance
// patches from probe point logs. See README.md for the file formats.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "caploc/errors.hpp"
#include "caploc/geometry.hpp"
#include "caploc/io.hpp"
#include "caploc/localize.hpp"
#include "caploc/metrics.hpp"
#include "caploc/response.hpp"
#include "caploc/simulate.hpp"
#include "caploc/sweeps.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::optional<std::string> layout;
    std::optional<double> eta;
    std::optional<int> ppcm;
    std::optional<std::uint64_t> seed;
    std::optional<int> rows;
    std::optional<int> cols;
    std::optional<int> samples;
    std::optional<double> jitter;
    std::optional<double> baseline;
    std::optional<double> amplitude;
    std::optional<double> half_distance;
    std::optional<double> noise_sigma;
    std::optional<std::string> calibration;
    std::optional<std::string> out;
    std::optional<std::string> layout_out;
    std::optional<std::string> logs;
    std::optional<std::string> report;
    std::optional<std::string> maps_dir;
    std::optional<std::string> grids;
    std::optional<std::string> etas;
    std::optional<std::string> resolutions;
    std::optional<int> trials;
    std::optional<std::string> config;

    json cfg;  // parsed --config document, empty object when absent
};

/// Flags override the JSON config file, which overrides the built-in default.
template <typename T>
T pick(const std::optional<T>& flag, const json& cfg, const char* key, T def) {
    if (flag) return *flag;
    if (cfg.contains(key)) {
        try {
            return cfg.at(key).get<T>();
        } catch (const json::exception& e) {
            throw caploc::InvalidArgument(std::string("config key '") + key + "': " + e.what());
        }
    }
    return def;
}

void load_config(Options& opt) {
    opt.cfg = json::object();
    if (!opt.config) return;
    std::ifstream in(*opt.config, std::ios::binary);
    if (!in) throw caploc::IoError("cannot open config " + *opt.config);
    try {
        in >> opt.cfg;
    } catch (const json::exception& e) {
        throw caploc::DataError(*opt.config + ": invalid JSON: " + e.what());
    }
    if (!opt.cfg.is_object()) throw caploc::DataError(*opt.config + ": config must be an object");
}

caploc::PatchLayout resolve_layout(const Options& opt) {
    const std::string name = pick<std::string>(opt.layout, opt.cfg, "layout", "patch-b");
    if (name == "patch-a") return caploc::make_patch_a();
    if (name == "patch-b") return caploc::make_patch_b();
    return caploc::io::read_layout_json(name);
}

caploc::ResponseModel resolve_model(const Options& opt) {
    caploc::ResponseModel model = caploc::default_response_model();
    const std::string calib = pick<std::string>(opt.calibration, opt.cfg, "calibration", "");
    if (!calib.empty()) {
        const auto samples = caploc::io::read_calibration_csv(calib);
        if (samples.size() < 4) {
            throw caploc::DataError(calib + ": need at least 4 calibration samples");
        }
        double lo = samples[0].reading, hi = samples[0].reading;
        double dmax = 0.0;
        for (const auto& s : samples) {
            lo = std::min(lo, s.reading);
            hi = std::max(hi, s.reading);
            dmax = std::max(dmax, s.distance_mm);
        }
        caploc::ResponseModel init;
        init.baseline = lo;
        init.amplitude = std::max(hi - lo, 1e-6);
        init.half_distance_mm = std::max(dmax / 4.0, 1e-3);
        model = caploc::fit_response_model(samples, init);
    }
    model.baseline = pick(opt.baseline, opt.cfg, "baseline", model.baseline);
    model.amplitude = pick(opt.amplitude, opt.cfg, "amplitude", model.amplitude);
    model.half_distance_mm = pick(opt.half_distance, opt.cfg, "half_distance", model.half_distance_mm);
    model.noise_sigma = pick(opt.noise_sigma, opt.cfg, "noise_sigma", model.noise_sigma);
    model.validate();
    return model;
}

fs::path default_layout_out(const fs::path& out) {
    fs::path p = out;
    p.replace_extension(".layout.json");
    return p;
}

std::vector<caploc::GridSize> parse_grids(const std::string& text) {
    std::vector<caploc::GridSize> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        const auto xpos = token.find('x');
        if (xpos == std::string::npos) {
            throw caploc::InvalidArgument("--grids entries must look like ROWSxCOLS, got '" +
                                          token + "'");
        }
        try {
            out.push_back({std::stoi(token.substr(0, xpos)), std::stoi(token.substr(xpos + 1))});
        } catch (const std::exception&) {
            throw caploc::InvalidArgument("--grids entry '" + token + "' is not ROWSxCOLS");
        }
    }
    if (out.empty()) throw caploc::InvalidArgument("--grids is empty");
    return out;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& text, const char* what, Parse parse) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            out.push_back(parse(token));
        } catch (const std::exception&) {
            throw caploc::InvalidArgument(std::string(what) + " entry '" + token +
                                          "' is not a number");
        }
    }
    if (out.empty()) throw caploc::InvalidArgument(std::string(what) + " is empty");
    return out;
}

int cmd_simulate(const Options& opt) {
    const auto layout = resolve_layout(opt);
    const auto model = resolve_model(opt);
    const int rows = pick(opt.rows, opt.cfg, "rows", 5);
    const int cols = pick(opt.cols, opt.cfg, "cols", 20);
    const int samples = pick(opt.samples, opt.cfg, "samples", 50);
    const double jitter = pick(opt.jitter, opt.cfg, "jitter", 2.0);
    const std::uint64_t seed = pick<std::uint64_t>(opt.seed, opt.cfg, "seed", 1);
    const fs::path out = pick<std::string>(opt.out, opt.cfg, "out", "point_logs.csv");
    const fs::path layout_out = opt.layout_out ? fs::path(*opt.layout_out)
                                               : default_layout_out(out);

    const auto plan = caploc::uniform_probe_plan(layout, rows, cols);
    const auto logs = caploc::simulate_acquisition(layout, model, plan, samples, jitter, seed);
    caploc::io::write_point_logs_csv(out, logs);
    caploc::io::write_layout_json(layout_out, layout);
    std::cout << "wrote " << logs.size() << " point logs to " << out.string() << "\n"
              << "wrote layout to " << layout_out.string() << "\n";
    return 0;
}

int cmd_localize(const Options& opt) {
    if (!opt.logs && !opt.cfg.contains("logs")) {
        throw caploc::InvalidArgument("localize requires --logs <point log CSV>");
    }
    const std::string logs_path = pick<std::string>(opt.logs, opt.cfg, "logs", "");
    const double eta = pick(opt.eta, opt.cfg, "eta", 0.65);
    const int ppcm = pick(opt.ppcm, opt.cfg, "ppcm", 128);
    const fs::path out = pick<std::string>(opt.out, opt.cfg, "out", "predictions.csv");
    const std::string maps_dir = pick<std::string>(opt.maps_dir, opt.cfg, "maps_dir", "");

    const auto logs = caploc::io::read_point_logs_csv(logs_path);
    const auto plan = caploc::io::infer_plan_from_logs(logs);
    const int n_sensors = static_cast<int>(logs.front().readings.size());

    std::optional<caploc::PatchLayout> layout;
    if (opt.layout || opt.cfg.contains("layout")) {
        layout = resolve_layout(opt);
        if (layout->sensor_count() != static_cast<std::size_t>(n_sensors)) {
            throw caploc::DataError("layout has " + std::to_string(layout->sensor_count()) +
                                    " sensors but the logs carry " + std::to_string(n_sensors) +
                                    " reading columns");
        }
        for (const auto& log : logs) {
            if (!layout->contains(log.probe_mm)) {
                throw caploc::DataError("probe " + caploc::detail::fmt_pos(log.probe_mm) +
                                        " lies outside the given layout");
            }
        }
    }

    if (!maps_dir.empty()) fs::create_directories(maps_dir);

    std::vector<caploc::Prediction> predictions;
    std::vector<std::pair<int, std::string>> failures;
    for (int id = 0; id < n_sensors; ++id) {
        try {
            const auto map = caploc::build_point_log_map(logs, plan, id);
            const auto interp = caploc::interpolate(map, ppcm);
            if (!maps_dir.empty()) {
                caploc::io::write_interpolated_map_csv(
                    fs::path(maps_dir) / ("sensor_" + std::to_string(id) + ".csv"), interp);
            }
            predictions.push_back(caploc::localize_sensor(interp, eta));
        } catch (const caploc::Error& e) {
            failures.emplace_back(id, e.what());
        }
    }
    for (const auto& [id, msg] : failures) {
        std::cerr << "warning: sensor " << id << " failed: " << msg << "\n";
    }
    if (predictions.empty()) throw caploc::DataError("no sensor could be localized");
    caploc::io::write_predictions_csv(out, predictions);
    std::cout << "wrote " << predictions.size() << " predictions to " << out.string() << "\n";
    for (const auto& p : predictions) {
        if (p.near_hull_edge) {
            std::cerr << "warning: sensor " << p.sensor_id
                      << " prediction sits at the probe hull edge; the true position may lie "
                         "outside the probed area\n";
        }
    }

    if (layout) {
        const auto truth = caploc::sensor_set(*layout);
        const auto stats = caploc::error_stats(predictions, truth);
        if (predictions.size() != truth.size()) {
            std::cerr << "warning: error statistics cover " << predictions.size() << " of "
                      << truth.size() << " sensors\n";
        }
        std::cout << "sigma_pe_mm=" << caploc::io::detail::format_double(stats.sigma_pe_mm)
                  << " mean_error_mm=" << caploc::io::detail::format_double(stats.mean_error_mm)
                  << " rms_error_mm=" << caploc::io::detail::format_double(stats.rms_error_mm)
                  << "\n";
        const std::string report = pick<std::string>(opt.report, opt.cfg, "report", "");
        if (!report.empty()) {
            std::ostringstream os;
            os << "sensor_id,true_x_mm,true_y_mm,pred_x_mm,pred_y_mm,error_mm\n";
            for (std::size_t i = 0; i < predictions.size(); ++i) {
                const auto& p = predictions[i];
                const auto t = truth.positions_mm[p.sensor_id];
                os << p.sensor_id << ',' << caploc::io::detail::format_double(t.x) << ','
                   << caploc::io::detail::format_double(t.y) << ','
                   << caploc::io::detail::format_double(p.position_mm.x) << ','
                   << caploc::io::detail::format_double(p.position_mm.y) << ','
                   << caploc::io::detail::format_double(stats.per_sensor_error_mm[i]) << "\n";
            }
            caploc::io::atomic_write_file(report, os.str());
        }
    }
    return 0;
}

int cmd_fit(const Options& opt) {
    if (!opt.calibration && !opt.cfg.contains("calibration")) {
        throw caploc::InvalidArgument("fit requires --calibration <CSV>");
    }
    const auto model = resolve_model(opt);  // fits when calibration is present
    const fs::path out = pick<std::string>(opt.out, opt.cfg, "out", "fit.csv");
    std::ostringstream os;
    os << "baseline,amplitude,half_distance_mm,noise_sigma\n"
       << caploc::io::detail::format_double(model.baseline) << ','
       << caploc::io::detail::format_double(model.amplitude) << ','
       << caploc::io::detail::format_double(model.half_distance_mm) << ','
       << caploc::io::detail::format_double(model.noise_sigma) << "\n";
    caploc::io::atomic_write_file(out, os.str());
    std::cout << "baseline=" << caploc::io::detail::format_double(model.baseline)
              << " amplitude=" << caploc::io::detail::format_double(model.amplitude)
              << " half_distance_mm=" << caploc::io::detail::format_double(model.half_distance_mm)
              << " noise_sigma=" << caploc::io::detail::format_double(model.noise_sigma) << "\n";
    return 0;
}

int cmd_snr(const Options& opt) {
    const auto layout = resolve_layout(opt);
    const auto model = resolve_model(opt);
    const int rows = pick(opt.rows, opt.cfg, "rows", 5);
    const int cols = pick(opt.cols, opt.cfg, "cols", 20);
    const int samples = pick(opt.samples, opt.cfg, "samples", 50);
    const double jitter = pick(opt.jitter, opt.cfg, "jitter", 2.0);
    const std::uint64_t seed = pick<std::uint64_t>(opt.seed, opt.cfg, "seed", 1);
    const fs::path out = pick<std::string>(opt.out, opt.cfg, "out", "snr.csv");

    const auto plan = caploc::uniform_probe_plan(layout, rows, cols);
    const auto logs = caploc::simulate_acquisition(layout, model, plan, samples, jitter, seed);
    // Decorrelate the no-contact stream from the acquisition streams.
    const auto baseline = caploc::simulate_baseline(
        layout, model, samples, caploc::splitmix64(seed ^ 0x9D39247E33776D41ULL));
    const auto report = caploc::compute_snr(baseline, logs);
    for (const auto& e : report.per_sensor) {
        if (!e.valid) {
            std::cerr << "warning: sensor " << e.sensor_id << ": SNR undefined (" << e.issue
                      << ")\n";
        }
    }
    if (report.valid_count == 0) throw caploc::DataError("SNR undefined for every sensor");
    caploc::io::write_snr_csv(out, report);
    std::cout << "mean_snr_db=" << caploc::io::detail::format_double(report.mean_db) << "\n"
              << "wrote per-sensor SNR to " << out.string() << "\n";
    return 0;
}

int cmd_sweep_count(const Options& opt) {
    const auto layout = resolve_layout(opt);
    const auto model = resolve_model(opt);
    const auto grids = parse_grids(pick<std::string>(opt.grids, opt.cfg, "grids",
                                                     "2x5,3x10,4x15,5x20"));
    const double eta = pick(opt.eta, opt.cfg, "eta", 0.65);
    const int ppcm = pick(opt.ppcm, opt.cfg, "ppcm", 128);
    const int trials = pick(opt.trials, opt.cfg, "trials", 10);
    const int samples = pick(opt.samples, opt.cfg, "samples", 50);
    const double jitter = pick(opt.jitter, opt.cfg, "jitter", 2.0);
    const std::uint64_t seed = pick<std::uint64_t>(opt.seed, opt.cfg, "seed", 1);
    const fs::path out = pick<std::string>(opt.out, opt.cfg, "out", "sweep_count.csv");

    const auto result = caploc::sweep_point_log_count(layout, model, grids, eta, ppcm, trials,
                                                      seed, samples, jitter);
    caploc::io::write_sweep_csv(out, result);
    for (const auto& cell : result.cells) {
        for (const auto& t : cell.trials) {
            if (t.failed) {
                std::cerr << "warning: grid " << cell.param1 << "x" << cell.param2 << " trial "
                          << t.trial << " failed: " << t.error << "\n";
            }
        }
    }
    std::cout << "wrote sweep to " << out.string() << "\n";
    return 0;
}

int cmd_sweep_eta_res(const Options& opt) {
    const auto layout = resolve_layout(opt);
    const auto model = resolve_model(opt);
    const auto etas = parse_list<double>(
        pick<std::string>(opt.etas, opt.cfg, "etas",
                          "0.4,0.45,0.5,0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9"),
        "--etas", [](const std::string& s) { return std::stod(s); });
    const auto resolutions = parse_list<int>(
        pick<std::string>(opt.resolutions, opt.cfg, "resolutions", "8,32,128"), "--resolutions",
        [](const std::string& s) { return std::stoi(s); });
    const int rows = pick(opt.rows, opt.cfg, "rows", 5);
    const int cols = pick(opt.cols, opt.cfg, "cols", 20);
    const int trials = pick(opt.trials, opt.cfg, "trials", 10);
    const int samples = pick(opt.samples, opt.cfg, "samples", 50);
    const double jitter = pick(opt.jitter, opt.cfg, "jitter", 2.0);
    const std::uint64_t seed = pick<std::uint64_t>(opt.seed, opt.cfg, "seed", 1);
    const fs::path out = pick<std::string>(opt.out, opt.cfg, "out", "sweep_eta_res.csv");

    const auto result = caploc::sweep_eta_resolution(layout, model, etas, resolutions, trials,
                                                     seed, rows, cols, samples, jitter);
    caploc::io::write_sweep_csv(out, result);
    std::cout << "wrote sweep to " << out.string() << "\n";
    return 0;
}

void emit_error(const std::string& message, int code) {
    json j;
    j["error"] = message;
    j["code"] = code;
    std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Concealed-sensor localization for mutual-capacitance tactile patches"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--layout", opt.layout,
                        "patch-a | patch-b | path to a layout JSON file");
        cmd->add_option("--eta", opt.eta, "threshold fraction in (0, 1] (default 0.65)");
        cmd->add_option("--ppcm", opt.ppcm, "interpolation resolution, pixels per cm (default 128)");
        cmd->add_option("--seed", opt.seed, "base RNG seed (default 1)");
        cmd->add_option("--samples", opt.samples, "raw samples per measurement (default 50)");
        cmd->add_option("--jitter", opt.jitter, "probe placement error radius, mm (default 2)");
        cmd->add_option("--rows", opt.rows, "probe grid rows (default 5)");
        cmd->add_option("--cols", opt.cols, "probe grid columns (default 20)");
        cmd->add_option("--baseline", opt.baseline, "response model no-contact reading");
        cmd->add_option("--amplitude", opt.amplitude, "response model peak excursion");
        cmd->add_option("--half-distance", opt.half_distance,
                        "distance at which the excursion halves, mm");
        cmd->add_option("--noise-sigma", opt.noise_sigma, "per-sample noise sigma");
        cmd->add_option("--calibration", opt.calibration,
                        "fit the response model from this distance_mm,reading CSV");
        cmd->add_option("--out", opt.out, "output file path");
        cmd->add_option("--config", opt.config, "JSON config file; flags override its values");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "simulate an acquisition run");
    add_common(simulate);
    simulate->add_option("--layout-out", opt.layout_out,
                         "where to write the ground-truth layout JSON");

    CLI::App* localize = app.add_subcommand("localize", "predict sensor positions from point logs");
    add_common(localize);
    localize->add_option("--logs", opt.logs, "point log CSV to ingest");
    localize->add_option("--report", opt.report, "per-sensor error report CSV (needs --layout)");
    localize->add_option("--maps-dir", opt.maps_dir,
                         "dump per-sensor interpolated maps as CSV matrices here");

    CLI::App* fit = app.add_subcommand("fit", "fit the response model to calibration samples");
    add_common(fit);

    CLI::App* snr = app.add_subcommand("snr", "per-sensor signal-to-noise report");
    add_common(snr);

    CLI::App* sweep_count = app.add_subcommand("sweep-count",
                                               "prediction error vs point-log quantity");
    add_common(sweep_count);
    sweep_count->add_option("--grids", opt.grids, "comma list of ROWSxCOLS (default 2x5,...,5x20)");
    sweep_count->add_option("--trials", opt.trials, "seeded trials per cell (default 10)");

    CLI::App* sweep_er = app.add_subcommand("sweep-eta-res",
                                            "prediction error over the eta x resolution grid");
    add_common(sweep_er);
    sweep_er->add_option("--etas", opt.etas, "comma list of thresholds (default 0.4..0.9)");
    sweep_er->add_option("--resolutions", opt.resolutions,
                         "comma list of pixels-per-cm (default 8,32,128)");
    sweep_er->add_option("--trials", opt.trials, "seeded trials per cell (default 10)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error(e.what(), 2);
        return 2;
    }

    try {
        load_config(opt);
        if (simulate->parsed()) return cmd_simulate(opt);
        if (localize->parsed()) return cmd_localize(opt);
        if (fit->parsed()) return cmd_fit(opt);
        if (snr->parsed()) return cmd_snr(opt);
        if (sweep_count->parsed()) return cmd_sweep_count(opt);
        if (sweep_er->parsed()) return cmd_sweep_eta_res(opt);
        emit_error("no subcommand", 2);
        return 2;
    } catch (const caploc::InvalidArgument& e) {
        emit_error(e.what(), 2);
        return 2;
    } catch (const std::exception& e) {
        emit_error(e.what(), 1);
        return 1;
    }
}
