// skipcast: run request-skipping sensor experiments from the command line.
//
// Exit codes: 0 success, 2 config error, 3 IO error, 4 simulation error.
// Every failure prints a single `error: ...` line to stderr.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skipcast/errors.hpp"
#include "skipcast/report_io.hpp"
#include "skipcast/rma.hpp"
#include "skipcast/sim.hpp"
#include "skipcast/trace.hpp"

namespace fs = std::filesystem;
using namespace skipcast;

namespace {

/// Local IO failures (refused overwrite, unwritable output) -> exit 3.
struct IoError : Error {
    using Error::Error;
};

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;
    bool force = false;
    std::optional<std::uint64_t> seed;
};

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    }
}

void write_file(const fs::path& path, const std::string& content, bool force) {
    if (!force && fs::exists(path)) {
        throw IoError("refusing to overwrite '" + path.string() + "' (pass --force)");
    }
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << content;
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

RunSetup load_setup(const GlobalOpts& opts) {
    if (opts.config_path.empty()) {
        throw ConfigError("--config", "required for this subcommand");
    }
    RunSetup setup = load_run_setup(opts.config_path);
    if (opts.seed) {
        setup.cfg.seed = *opts.seed;
    }
    return setup;
}

int cmd_run(const GlobalOpts& opts, const std::vector<std::string>& formats) {
    bool want_json = false;
    bool want_csv = false;
    for (const std::string& f : formats) {
        if (f == "json") {
            want_json = true;
        } else if (f == "csv") {
            want_csv = true;
        } else {
            throw ConfigError("--format", "must be 'json' or 'csv', got '" + f + "'");
        }
    }

    RunSetup setup = load_setup(opts);
    TraceSeries trace = make_trace(setup.trace);
    SimReport report = run_experiment(trace, setup.cfg);

    const std::string summary = summary_csv_header() + "\n" + summary_csv_row(report) + "\n";
    std::fputs(summary.c_str(), stdout);

    if (!opts.out_dir.empty()) {
        ensure_out_dir(opts.out_dir);
        const fs::path dir(opts.out_dir);
        if (want_json) {
            write_file(dir / "report.json", report_to_json(report).dump(2) + "\n", opts.force);
        }
        if (want_csv) {
            write_file(dir / "rounds.csv", round_log_csv(report), opts.force);
            write_file(dir / "summary.csv", summary, opts.force);
        }
    }
    return 0;
}

int cmd_schedule(const GlobalOpts& opts, std::int64_t tr1, std::int64_t tr2,
                 std::int64_t horizon) {
    if (horizon < 1) {
        throw ConfigError("horizon", "must be >= 1");
    }
    const std::vector<std::int64_t> contacts = rma_contacts(tr1, tr2, horizon);
    std::string text;
    for (std::int64_t r : contacts) {
        text += std::to_string(r);
        text += '\n';
    }
    std::fputs(text.c_str(), stdout);
    if (!opts.out_dir.empty()) {
        ensure_out_dir(opts.out_dir);
        write_file(fs::path(opts.out_dir) / "schedule.csv", text, opts.force);
    }
    return 0;
}

SimConfig config_with_param(SimConfig cfg, const std::string& param, double value) {
    if (param == "alpha") {
        cfg.alpha = value;
    } else if (param == "resolution") {
        cfg.quant.resolution = value;
    } else if (param == "tr1" || param == "tr2") {
        const double rounded = std::nearbyint(value);
        if (!std::isfinite(value) || std::abs(value - rounded) > 1e-9) {
            throw ConfigError("values", param + " values must be integers, got " +
                                             std::to_string(value));
        }
        (param == "tr1" ? cfg.tr1 : cfg.tr2) = static_cast<std::int64_t>(rounded);
    } else {
        throw ConfigError("param", "unknown sweep parameter '" + param +
                                       "' (expected alpha, tr1, tr2 or resolution)");
    }
    cfg.validate();
    return cfg;
}

std::string fmt_value(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

int cmd_sweep(const GlobalOpts& opts, const std::string& param, const std::vector<double>& values) {
    if (values.empty()) {
        throw ConfigError("values", "must be nonempty");
    }
    RunSetup setup = load_setup(opts);
    const TraceSeries trace = make_trace(setup.trace);

    // Validate every configuration up front so config errors surface
    // deterministically, before any run starts.
    std::vector<SimConfig> configs;
    configs.reserve(values.size());
    for (double v : values) {
        configs.push_back(config_with_param(setup.cfg, param, v));
    }

    const auto n = static_cast<std::int64_t>(values.size());
    std::vector<std::string> rows(values.size());
    std::vector<std::string> failures(values.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            const SimReport report = run_experiment(trace, configs[static_cast<std::size_t>(i)]);
            rows[static_cast<std::size_t>(i)] = summary_csv_row(report);
        } catch (const std::exception& e) {
            failures[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (std::size_t i = 0; i < failures.size(); ++i) {
        if (!failures[i].empty()) {
            throw Error(param + "=" + fmt_value(values[i]) + ": " + failures[i]);
        }
    }

    std::string csv = param + "," + summary_csv_header() + "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        csv += fmt_value(values[i]);
        csv += ',';
        csv += rows[i];
        csv += '\n';
    }
    std::fputs(csv.c_str(), stdout);
    if (!opts.out_dir.empty()) {
        ensure_out_dir(opts.out_dir);
        write_file(fs::path(opts.out_dir) / "sweep.csv", csv, opts.force);
    }
    return 0;
}

int cmd_gen_trace(const GlobalOpts& opts, const std::string& wave, double amplitude,
                  int period_samples, double offset, double noise_std, int length,
                  std::uint64_t spec_seed) {
    SyntheticSpec spec;
    try {
        spec.kind = wave_kind_from_name(wave);
    } catch (const InvalidSpec& e) {
        throw ConfigError("--wave", e.what());
    }
    spec.amplitude = amplitude;
    spec.period_samples = period_samples;
    spec.offset = offset;
    spec.noise_std = noise_std;
    spec.length = length;
    spec.seed = opts.seed.value_or(spec_seed);

    const TraceSeries trace = generate(spec);
    const std::string csv = trace_to_csv(trace);
    if (opts.out_dir.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        ensure_out_dir(opts.out_dir);
        write_file(fs::path(opts.out_dir) / "trace.csv", csv, opts.force);
    }
    return 0;
}

int cmd_train(const GlobalOpts& opts) {
    RunSetup setup = load_setup(opts);
    const SimConfig& cfg = setup.cfg;
    const TraceSeries trace = make_trace(setup.trace);
    const auto needed = static_cast<std::size_t>(cfg.train_len + cfg.horizon);
    if (trace.size() < needed) {
        throw TraceTooShort("trace has " + std::to_string(trace.size()) + " samples, need " +
                            std::to_string(needed));
    }

    // Forecaster-only evaluation on the raw trace; the protocol stays out
    // of the loop.
    const std::vector<double> history(trace.values.begin(),
                                      trace.values.begin() + cfg.train_len);
    ForecastSpec fspec = cfg.forecaster;
    if (fspec.train.seed == 0) {
        fspec.train.seed = cfg.seed;
    }
    const ForecastModel model = build_forecaster(fspec, history);
    const std::vector<double> predictions =
        model.predict_closed_loop(history, static_cast<int>(cfg.horizon));
    const std::vector<double> actuals(trace.values.begin() + cfg.train_len,
                                      trace.values.begin() + static_cast<std::ptrdiff_t>(needed));
    const ForecastReport report = evaluate(predictions, actuals);

    const std::string text = forecast_report_to_json(report).dump(2) + "\n";
    std::fputs(text.c_str(), stdout);
    if (!opts.out_dir.empty()) {
        ensure_out_dir(opts.out_dir);
        const fs::path dir(opts.out_dir);
        write_file(dir / "forecast_report.json", text, opts.force);
        write_file(dir / "model.json", model_to_json(model).dump(2) + "\n", opts.force);
    }
    return 0;
}

int dispatch(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const InvalidSpec& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const FileNotFound& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const EmptyTrace& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const fs::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prediction-driven transmission reduction: simulator and report tool"};
    app.require_subcommand(1);

    GlobalOpts opts;
    std::uint64_t seed_value = 0;
    app.add_option("--config", opts.config_path, "Run configuration JSON file");
    app.add_option("--out", opts.out_dir, "Output directory for report files");
    CLI::Option* seed_opt =
        app.add_option("--seed", seed_value, "Override the configured RNG seed");
    app.add_flag("--force", opts.force, "Overwrite existing output files");

    auto* run = app.add_subcommand("run", "Run a full experiment from --config");
    run->fallthrough();
    std::vector<std::string> formats{"json", "csv"};
    run->add_option("--format", formats, "Report formats to write (json, csv)")
        ->delimiter(',');

    auto* schedule =
        app.add_subcommand("schedule", "Print the all-silent contact schedule, one round per line");
    schedule->fallthrough();
    std::int64_t tr1 = 3;
    std::int64_t tr2 = 7;
    std::int64_t horizon = 150;
    schedule->add_option("tr1", tr1, "Threshold between classical and fast phases")->required();
    schedule->add_option("tr2", tr2, "Threshold between fast and linear phases")->required();
    schedule->add_option("horizon", horizon, "Number of rounds")->required();

    auto* sweep = app.add_subcommand("sweep", "Run one experiment per parameter value");
    sweep->fallthrough();
    std::string sweep_param;
    std::vector<double> sweep_values;
    sweep->add_option("--param", sweep_param, "Parameter to vary: alpha, tr1, tr2, resolution")
        ->required();
    sweep->add_option("--values", sweep_values, "Values to sweep, in output order")
        ->required()
        ->delimiter(',');

    auto* gen = app.add_subcommand("gen-trace", "Generate a synthetic trace CSV");
    gen->fallthrough();
    std::string wave = "sine";
    double amplitude = 1.0;
    int period_samples = 24;
    double offset = 0.0;
    double noise_std = 0.0;
    int length = 400;
    std::uint64_t gen_seed = 0;
    gen->add_option("--wave", wave, "sine, sine_plus_trend, square or constant");
    gen->add_option("--amplitude", amplitude, "Wave amplitude");
    gen->add_option("--period-samples", period_samples, "Samples per wave period");
    gen->add_option("--offset", offset, "Constant offset");
    gen->add_option("--noise-std", noise_std, "Gaussian noise standard deviation");
    gen->add_option("--length", length, "Number of samples");

    auto* train =
        app.add_subcommand("train", "Fit the configured forecaster and print its quality report");
    train->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    if (seed_opt->count() > 0) {
        opts.seed = seed_value;
    }

    if (*run) {
        return dispatch([&] { return cmd_run(opts, formats); });
    }
    if (*schedule) {
        return dispatch([&] { return cmd_schedule(opts, tr1, tr2, horizon); });
    }
    if (*sweep) {
        return dispatch([&] { return cmd_sweep(opts, sweep_param, sweep_values); });
    }
    if (*gen) {
        return dispatch([&] {
            return cmd_gen_trace(opts, wave, amplitude, period_samples, offset, noise_std, length,
                                 gen_seed);
        });
    }
    if (*train) {
        return dispatch([&] { return cmd_train(opts); });
    }
    std::fprintf(stderr, "error: no subcommand given\n");
    return 2;
}
