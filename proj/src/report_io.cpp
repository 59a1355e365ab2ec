#include "skipcast/report_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "skipcast/errors.hpp"
#include "skipcast/narx_kernels.hpp"

namespace skipcast {

namespace {

using nlohmann::json;

std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

std::string fmt_double(double v) {
    std::array<char, 64> buf;
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), end);
}

void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) {
        throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    }
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError(join(path, it.key()), "unknown key");
        }
    }
}

double get_double(const json& obj, const std::string& path, const char* key, double fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        return fallback;
    }
    if (!it->is_number()) {
        throw ConfigError(join(path, key), "expected a number");
    }
    return it->get<double>();
}

std::int64_t get_int(const json& obj, const std::string& path, const char* key,
                     std::int64_t fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        return fallback;
    }
    if (!it->is_number_integer()) {
        throw ConfigError(join(path, key), "expected an integer");
    }
    return it->get<std::int64_t>();
}

int get_int32(const json& obj, const std::string& path, const char* key, int fallback) {
    std::int64_t v = get_int(obj, path, key, fallback);
    if (v < INT32_MIN || v > INT32_MAX) {
        throw ConfigError(join(path, key), "out of range");
    }
    return static_cast<int>(v);
}

std::uint64_t get_seed(const json& obj, const std::string& path, const char* key,
                       std::uint64_t fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        return fallback;
    }
    if (!it->is_number_integer() ||
        (!it->is_number_unsigned() && it->get<std::int64_t>() < 0)) {
        throw ConfigError(join(path, key), "expected a non-negative integer");
    }
    return it->get<std::uint64_t>();
}

std::string require_string(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ConfigError(join(path, key), "required");
    }
    if (!it->is_string()) {
        throw ConfigError(join(path, key), "expected a string");
    }
    return it->get<std::string>();
}

const char* source_name(StoreSource source) {
    switch (source) {
    case StoreSource::replied: return "replied";
    case StoreSource::silent_accepted: return "silent_accepted";
    case StoreSource::skipped_fill: return "skipped_fill";
    }
    return "silent_accepted";
}

TrainConfig train_from_json(const json& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path,
               {"hidden_units", "delay_taps", "epochs", "learning_rate", "l2_lambda", "seed"});
    TrainConfig train;
    train.hidden_units = get_int32(j, path, "hidden_units", train.hidden_units);
    train.delay_taps = get_int32(j, path, "delay_taps", train.delay_taps);
    train.epochs = get_int32(j, path, "epochs", train.epochs);
    train.learning_rate = get_double(j, path, "learning_rate", train.learning_rate);
    train.l2_lambda = get_double(j, path, "l2_lambda", train.l2_lambda);
    // In a config file an omitted seed means "inherit the run seed".
    train.seed = get_seed(j, path, "seed", 0);
    return train;
}

ForecastSpec forecaster_from_json(const json& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path, {"kind", "window_n", "season_len", "train"});
    ForecastSpec spec;
    auto it = j.find("kind");
    if (it != j.end()) {
        if (!it->is_string()) {
            throw ConfigError(join(path, "kind"), "expected a string");
        }
        spec.kind = model_kind_from_name(it->get<std::string>());
    }
    spec.window_n = get_int32(j, path, "window_n", spec.window_n);
    spec.season_len = get_int32(j, path, "season_len", spec.season_len);
    if (auto t = j.find("train"); t != j.end()) {
        spec.train = train_from_json(*t, join(path, "train"));
    } else {
        // Unset means "inherit the run seed" rather than the standalone
        // training default.
        spec.train.seed = 0;
    }
    return spec;
}

QuantSpec quant_from_json(const json& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path, {"resolution", "value_bits", "max_mag_bits"});
    QuantSpec quant;
    quant.resolution = get_double(j, path, "resolution", quant.resolution);
    quant.value_bits = get_int32(j, path, "value_bits", quant.value_bits);
    quant.max_mag_bits = get_int32(j, path, "max_mag_bits", quant.max_mag_bits);
    return quant;
}

EnergyModel energy_from_json(const json& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path, {"tx_per_bit", "rx_per_bit", "proc_per_round", "sense_per_round"});
    EnergyModel energy;
    energy.tx_per_bit = get_double(j, path, "tx_per_bit", energy.tx_per_bit);
    energy.rx_per_bit = get_double(j, path, "rx_per_bit", energy.rx_per_bit);
    energy.proc_per_round = get_double(j, path, "proc_per_round", energy.proc_per_round);
    energy.sense_per_round = get_double(j, path, "sense_per_round", energy.sense_per_round);
    return energy;
}

TraceSource trace_from_json(const json& j, const std::string& path) {
    expect_object(j, path);
    TraceSource source;
    std::string kind = require_string(j, path, "kind");
    if (kind == "file") {
        check_keys(j, path, {"kind", "path", "sensor_id", "period"});
        source.kind = TraceSource::Kind::file;
        source.path = require_string(j, path, "path");
        source.sensor_id = get_int32(j, path, "sensor_id", source.sensor_id);
        source.period = get_double(j, path, "period", source.period);
        if (!(source.period > 0.0)) {
            throw ConfigError(join(path, "period"), "must be positive");
        }
    } else if (kind == "synthetic") {
        check_keys(j, path, {"kind", "wave", "amplitude", "period_samples", "offset",
                             "noise_std", "length", "seed"});
        source.kind = TraceSource::Kind::synthetic;
        SyntheticSpec& spec = source.spec;
        if (auto w = j.find("wave"); w != j.end()) {
            if (!w->is_string()) {
                throw ConfigError(join(path, "wave"), "expected a string");
            }
            try {
                spec.kind = wave_kind_from_name(w->get<std::string>());
            } catch (const InvalidSpec& e) {
                throw ConfigError(join(path, "wave"), e.what());
            }
        }
        spec.amplitude = get_double(j, path, "amplitude", spec.amplitude);
        spec.period_samples = get_int32(j, path, "period_samples", spec.period_samples);
        spec.offset = get_double(j, path, "offset", spec.offset);
        spec.noise_std = get_double(j, path, "noise_std", spec.noise_std);
        spec.length = get_int32(j, path, "length", spec.length);
        spec.seed = get_seed(j, path, "seed", spec.seed);
    } else {
        throw ConfigError(join(path, "kind"), "must be \"file\" or \"synthetic\"");
    }
    return source;
}

json energy_to_json(const EnergyLedger& ledger) {
    return json{{"sensor_tx", ledger.sensor_tx},
                {"sensor_rx", ledger.sensor_rx},
                {"sensor_proc", ledger.sensor_proc},
                {"sensor_sense", ledger.sensor_sense},
                {"baseline_tx", ledger.baseline_tx},
                {"baseline_rx", ledger.baseline_rx},
                {"baseline_proc", ledger.baseline_proc}};
}

} // namespace

TraceSeries make_trace(const TraceSource& source) {
    if (source.kind == TraceSource::Kind::file) {
        return load_trace(source.path, source.sensor_id, source.period);
    }
    return generate(source.spec);
}

RunSetup run_setup_from_json(const json& doc) {
    expect_object(doc, "");
    check_keys(doc, "",
               {"trace", "alpha", "tr1", "tr2", "train_len", "horizon", "forecaster", "quant",
                "energy", "seed"});
    auto trace_it = doc.find("trace");
    if (trace_it == doc.end()) {
        throw ConfigError("trace", "required");
    }

    RunSetup setup;
    setup.trace = trace_from_json(*trace_it, "trace");

    SimConfig& cfg = setup.cfg;
    cfg.alpha = get_double(doc, "", "alpha", cfg.alpha);
    cfg.tr1 = get_int(doc, "", "tr1", cfg.tr1);
    cfg.tr2 = get_int(doc, "", "tr2", cfg.tr2);
    cfg.train_len = get_int(doc, "", "train_len", cfg.train_len);
    cfg.horizon = get_int(doc, "", "horizon", cfg.horizon);
    cfg.seed = get_seed(doc, "", "seed", cfg.seed);
    if (auto f = doc.find("forecaster"); f != doc.end()) {
        cfg.forecaster = forecaster_from_json(*f, "forecaster");
    } else {
        cfg.forecaster.train.seed = 0;
    }
    if (auto q = doc.find("quant"); q != doc.end()) {
        cfg.quant = quant_from_json(*q, "quant");
    }
    if (auto e = doc.find("energy"); e != doc.end()) {
        cfg.energy = energy_from_json(*e, "energy");
    }
    cfg.validate();
    return setup;
}

RunSetup load_run_setup(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FileNotFound("cannot open config file '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
            }
        }
        throw ParseError(std::string("invalid JSON: ") + e.what(), line);
    }
    return run_setup_from_json(doc);
}

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
    case ModelKind::persistence: return "persistence";
    case ModelKind::seasonal_naive: return "seasonal_naive";
    case ModelKind::ar: return "ar";
    case ModelKind::narx: return "narx";
    }
    return "persistence";
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "persistence") return ModelKind::persistence;
    if (name == "seasonal_naive") return ModelKind::seasonal_naive;
    if (name == "ar") return ModelKind::ar;
    if (name == "narx") return ModelKind::narx;
    throw ConfigError("kind", "unknown model kind '" + name + "'");
}

json model_to_json(const ForecastModel& model) {
    json j;
    j["kind"] = model_kind_name(model.kind);
    j["window_n"] = model.window_n;
    j["season_len"] = model.season_len;
    j["config"] = json{{"hidden_units", model.config.hidden_units},
                       {"delay_taps", model.config.delay_taps},
                       {"epochs", model.config.epochs},
                       {"learning_rate", model.config.learning_rate},
                       {"l2_lambda", model.config.l2_lambda},
                       {"seed", model.config.seed}};
    j["parameters"] = model.parameters;
    return j;
}

ForecastModel model_from_json(const json& doc) {
    expect_object(doc, "model");
    check_keys(doc, "model", {"kind", "window_n", "season_len", "config", "parameters"});
    ForecastModel model;
    model.kind = model_kind_from_name(require_string(doc, "model", "kind"));
    model.window_n = get_int32(doc, "model", "window_n", model.window_n);
    model.season_len = get_int32(doc, "model", "season_len", model.season_len);
    if (auto c = doc.find("config"); c != doc.end()) {
        model.config = train_from_json(*c, "model.config");
    }
    if (auto p = doc.find("parameters"); p != doc.end()) {
        if (!p->is_array()) {
            throw ConfigError("model.parameters", "expected an array");
        }
        model.parameters.reserve(p->size());
        for (const auto& v : *p) {
            if (!v.is_number()) {
                throw ConfigError("model.parameters", "expected numbers");
            }
            double d = v.get<double>();
            if (!std::isfinite(d)) {
                throw ConfigError("model.parameters", "must be finite");
            }
            model.parameters.push_back(d);
        }
    }

    std::size_t expected = 0;
    switch (model.kind) {
    case ModelKind::persistence:
    case ModelKind::seasonal_naive:
        expected = 0;
        break;
    case ModelKind::ar:
        if (model.window_n < 1) {
            throw ConfigError("model.window_n", "must be >= 1");
        }
        expected = static_cast<std::size_t>(model.window_n) + 1;
        break;
    case ModelKind::narx: {
        if (model.config.hidden_units < 1 || model.config.delay_taps < 1) {
            throw ConfigError("model.config", "hidden_units and delay_taps must be >= 1");
        }
        NarxDims dims{model.config.delay_taps, model.config.hidden_units};
        expected = dims.param_count() + 2; // + standardization mean/std
        break;
    }
    }
    if (model.parameters.size() != expected) {
        throw ConfigError("model.parameters",
                          "expected " + std::to_string(expected) + " values, got " +
                              std::to_string(model.parameters.size()));
    }
    if (model.kind == ModelKind::seasonal_naive && model.season_len < 1) {
        throw ConfigError("model.season_len", "must be >= 1");
    }
    return model;
}

json forecast_report_to_json(const ForecastReport& report) {
    json j;
    j["mse"] = report.mse;
    if (report.regression_r) {
        j["regression_r"] = *report.regression_r;
    } else {
        j["regression_r"] = nullptr;
    }
    j["bin_edges"] = report.bin_edges;
    j["bin_counts"] = report.bin_counts;
    return j;
}

json report_to_json(const SimReport& report) {
    json j;
    j["rounds"] = report.rounds;
    j["contacts"] = report.contacts;
    j["skips"] = report.skips;
    j["replies"] = report.replies;
    j["silent_accepted"] = report.silent_accepted;
    j["max_abs_error_contacted"] = report.max_abs_error_contacted;
    j["energy"] = energy_to_json(report.energy);
    j["reductions"] = json{{"tx_ratio", report.reductions.tx_ratio},
                           {"proc_ratio", report.reductions.proc_ratio},
                           {"tx_all_silent", report.reductions.tx_all_silent},
                           {"proc_all_silent", report.reductions.proc_all_silent}};
    j["forecast"] = forecast_report_to_json(report.forecast_report);
    json stored = json::array();
    for (const StoredValue& s : report.stored_series) {
        stored.push_back(json{{"t", s.t}, {"s", s.value_s}, {"source", source_name(s.source)}});
    }
    j["stored_series"] = std::move(stored);
    return j;
}

std::string round_log_csv(const SimReport& report) {
    std::string out = "t,source,E,M,S,replied,bits_tx,bits_rx\n";
    for (const RoundLogEntry& row : report.round_log) {
        out += std::to_string(row.t);
        out += ',';
        out += source_name(row.source);
        out += ',';
        out += fmt_double(row.e);
        out += ',';
        out += fmt_double(row.m);
        out += ',';
        out += fmt_double(row.s);
        out += ',';
        out += row.replied ? '1' : '0';
        out += ',';
        out += std::to_string(row.bits_tx);
        out += ',';
        out += std::to_string(row.bits_rx);
        out += '\n';
    }
    return out;
}

std::string summary_csv_header() {
    return "rounds,contacts,skips,replies,silent_accepted,max_abs_error_contacted,mse,"
           "tx_ratio,proc_ratio,sensor_tx,sensor_rx,sensor_proc,sensor_sense,"
           "baseline_tx,baseline_rx,baseline_proc";
}

std::string summary_csv_row(const SimReport& report) {
    std::string out;
    out += std::to_string(report.rounds);
    out += ',';
    out += std::to_string(report.contacts);
    out += ',';
    out += std::to_string(report.skips);
    out += ',';
    out += std::to_string(report.replies);
    out += ',';
    out += std::to_string(report.silent_accepted);
    out += ',';
    out += fmt_double(report.max_abs_error_contacted);
    out += ',';
    out += fmt_double(report.forecast_report.mse);
    out += ',';
    out += fmt_double(report.reductions.tx_ratio);
    out += ',';
    out += fmt_double(report.reductions.proc_ratio);
    out += ',';
    out += fmt_double(report.energy.sensor_tx);
    out += ',';
    out += fmt_double(report.energy.sensor_rx);
    out += ',';
    out += fmt_double(report.energy.sensor_proc);
    out += ',';
    out += fmt_double(report.energy.sensor_sense);
    out += ',';
    out += fmt_double(report.energy.baseline_tx);
    out += ',';
    out += fmt_double(report.energy.baseline_rx);
    out += ',';
    out += fmt_double(report.energy.baseline_proc);
    return out;
}

} // namespace skipcast
