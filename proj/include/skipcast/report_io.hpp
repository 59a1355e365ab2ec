#ifndef SKIPCAST_REPORT_IO_HPP
#define SKIPCAST_REPORT_IO_HPP

#include <string>

#include <json.hpp>

#include "skipcast/forecast.hpp"
#include "skipcast/sim.hpp"
#include "skipcast/trace.hpp"

namespace skipcast {

/// Where an experiment's ground-truth trace comes from.
struct TraceSource {
    enum class Kind { file, synthetic } kind = Kind::synthetic;
    // file
    std::string path;
    int sensor_id = 0;
    double period = 1.0;
    // synthetic
    SyntheticSpec spec;
};

/// A parsed run configuration: the simulation parameters plus the trace.
struct RunSetup {
    SimConfig cfg;
    TraceSource trace;
};

TraceSeries make_trace(const TraceSource& source);

/// Parse/serialize the canonical run-config JSON document. Unknown keys
/// and type mismatches raise ConfigError with the offending field path.
RunSetup run_setup_from_json(const nlohmann::json& doc);
RunSetup load_run_setup(const std::string& path);

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

/// Model persistence: {kind, window_n, season_len, config, parameters[]}.
/// Doubles are emitted with shortest round-trip formatting, so parameters
/// reload exactly.
nlohmann::json model_to_json(const ForecastModel& model);
ForecastModel model_from_json(const nlohmann::json& doc);

nlohmann::json forecast_report_to_json(const ForecastReport& report);
nlohmann::json report_to_json(const SimReport& report);

/// Per-round CSV: t,source,E,M,S,replied,bits_tx,bits_rx.
std::string round_log_csv(const SimReport& report);

/// One-line-per-run summary CSV.
std::string summary_csv_header();
std::string summary_csv_row(const SimReport& report);

} // namespace skipcast

#endif
