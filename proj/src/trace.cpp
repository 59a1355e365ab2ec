#include "skipcast/trace.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "skipcast/errors.hpp"
#include "skipcast/rng.hpp"

namespace skipcast {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    return s;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

bool parse_index(std::string_view s, long long& out) {
    s = trim(s);
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

std::string format_roundtrip(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace

TraceSeries load_trace(const std::string& path, int sensor_id, double period) {
    std::ifstream in(path);
    if (!in.is_open()) throw FileNotFound("no such trace file: " + path);

    TraceSeries series;
    series.sensor_id = sensor_id;
    series.period = period;

    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty()) continue;

        const auto comma = line.find(',');
        std::string_view index_field = comma == std::string_view::npos ? line : line.substr(0, comma);
        std::string_view value_field = comma == std::string_view::npos ? std::string_view{} : line.substr(comma + 1);

        long long idx = 0;
        if (!parse_index(index_field, idx)) {
            // A non-numeric first field on line 1 is the optional header.
            if (line_no == 1) continue;
            throw ParseError("bad index field '" + std::string(index_field) + "'", line_no);
        }
        double value = 0.0;
        if (!parse_double(value_field, value))
            throw ParseError("bad value field '" + std::string(value_field) + "'", line_no);
        series.values.push_back(value);
    }
    if (series.values.empty()) throw EmptyTrace("trace file has no samples: " + path);
    return series;
}

std::string trace_to_csv(const TraceSeries& series) {
    std::string out = "t,value\n";
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += format_roundtrip(series.values[i]);
        out += '\n';
    }
    return out;
}

void save_trace(const TraceSeries& series, const std::string& path) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out.is_open()) throw FileNotFound("cannot open for writing: " + path);
    out << trace_to_csv(series);
    if (!out) throw Error("write failed: " + path);
}

const char* wave_kind_name(WaveKind kind) {
    switch (kind) {
    case WaveKind::sine: return "sine";
    case WaveKind::sine_plus_trend: return "sine_plus_trend";
    case WaveKind::square: return "square";
    case WaveKind::constant: return "constant";
    }
    return "sine";
}

WaveKind wave_kind_from_name(const std::string& name) {
    if (name == "sine") return WaveKind::sine;
    if (name == "sine_plus_trend") return WaveKind::sine_plus_trend;
    if (name == "square") return WaveKind::square;
    if (name == "constant") return WaveKind::constant;
    throw InvalidSpec("unknown wave kind '" + name + "'");
}

TraceSeries generate(const SyntheticSpec& spec) {
    if (spec.length < 1) throw InvalidSpec("length must be >= 1");
    if (spec.period_samples < 1) throw InvalidSpec("period_samples must be >= 1");
    if (spec.noise_std < 0.0 || !std::isfinite(spec.noise_std))
        throw InvalidSpec("noise_std must be finite and >= 0");
    if (!std::isfinite(spec.amplitude) || !std::isfinite(spec.offset))
        throw InvalidSpec("amplitude and offset must be finite");

    constexpr double two_pi = 6.283185307179586476925286766559;
    Rng rng(spec.seed);

    TraceSeries series;
    series.period = 1.0;
    series.values.reserve(static_cast<std::size_t>(spec.length));
    for (int t = 1; t <= spec.length; ++t) {
        // Integer phase index keeps noiseless waves bit-exactly periodic.
        const int phase_idx = (t - 1) % spec.period_samples;
        const double phase = static_cast<double>(phase_idx) / spec.period_samples;

        double v = spec.offset;
        switch (spec.kind) {
        case WaveKind::sine:
            v += spec.amplitude * std::sin(two_pi * phase);
            break;
        case WaveKind::sine_plus_trend:
            v += spec.amplitude * std::sin(two_pi * phase);
            if (spec.length > 1)
                v += spec.amplitude * static_cast<double>(t - 1) / (spec.length - 1);
            break;
        case WaveKind::square:
            v += spec.amplitude * (phase < 0.5 ? 1.0 : -1.0);
            break;
        case WaveKind::constant:
            break;
        }
        if (spec.noise_std > 0.0) v += spec.noise_std * rng.gaussian();
        series.values.push_back(v);
    }
    return series;
}

} // namespace skipcast
