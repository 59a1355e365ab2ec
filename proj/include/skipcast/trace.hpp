#ifndef SKIPCAST_TRACE_HPP
#define SKIPCAST_TRACE_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace skipcast {

/// Ground-truth measurement series for one sensor. Sample indices are
/// 1-based everywhere in this library; `period` is the request interval
/// in seconds and is informational (the simulation is slotted).
struct TraceSeries {
    int sensor_id = 0;
    double period = 1.0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }

    /// Value at 1-based sample index t.
    double at(std::int64_t t) const { return values.at(static_cast<std::size_t>(t - 1)); }
};

enum class WaveKind { sine, sine_plus_trend, square, constant };

/// Parameters for deterministic synthetic traces. Same spec (including
/// seed) always produces a bit-identical series.
struct SyntheticSpec {
    WaveKind kind = WaveKind::sine;
    double amplitude = 1.0;
    int period_samples = 24;
    double offset = 0.0;
    double noise_std = 0.0;
    int length = 1;
    std::uint64_t seed = 0;
};

/// Parse a trace CSV (optional `t,value` header; one `index,value` row per
/// sample, '.' decimal separator, LF or CRLF). Unparseable rows are a hard
/// error, never skipped.
/// Throws FileNotFound, ParseError (with 1-based line number), EmptyTrace.
TraceSeries load_trace(const std::string& path, int sensor_id = 0, double period = 1.0);

/// Render a trace in the CSV format load_trace reads (`t,value` header,
/// 1-based indices). Values use shortest round-trip formatting, so loading
/// the output reproduces the series exactly.
std::string trace_to_csv(const TraceSeries& series);

/// trace_to_csv straight to a file.
void save_trace(const TraceSeries& series, const std::string& path);

const char* wave_kind_name(WaveKind kind);
/// Throws InvalidSpec for an unrecognized name.
WaveKind wave_kind_from_name(const std::string& name);

/// Generate a synthetic series:
///   values[t] = offset + amplitude * waveform(phase(t)) + trend(t) + noise
/// where phase(t) = ((t-1) mod period_samples) / period_samples, so a
/// noiseless wave is bit-exactly periodic. sine_plus_trend adds a linear
/// drift of one amplitude across the full series. Noise is gaussian with
/// std noise_std drawn from Rng(seed).
/// Throws InvalidSpec.
TraceSeries generate(const SyntheticSpec& spec);

} // namespace skipcast

#endif
