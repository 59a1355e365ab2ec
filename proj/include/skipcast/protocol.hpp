#ifndef SKIPCAST_PROTOCOL_HPP
#define SKIPCAST_PROTOCOL_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace skipcast {

/// BS -> sensor request: carries the prediction E and the accepted error
/// band half-width alpha. probe_flag marks link-probe traffic so it can be
/// accounted separately from data rounds.
struct RequestPacket {
    std::uint16_t seq = 0;
    double predicted_e = 0.0;
    double alpha = 0.0;
    bool probe_flag = false;
};

/// Sensor -> BS reply: the signed difference V = M - E. A zero difference
/// is never transmitted; silence expresses it.
struct ReplyPacket {
    std::uint16_t seq = 0;
    double variance_v = 0.0;
};

/// Fixed-point wire parameters. Both ends of a deployment must agree on
/// these; they are part of the run configuration.
struct QuantSpec {
    double resolution = 0.0625; // 2^-4
    int value_bits = 16;        // width of the E and alpha request fields
    int max_mag_bits = 24;      // cap on the variable-width variance magnitude

    bool valid() const {
        return resolution > 0.0 && value_bits >= 1 && value_bits <= 32 &&
               max_mag_bits >= 1 && max_mag_bits <= 32;
    }
};

/// Round a value onto the quantization grid exactly as the codec does.
double quantize_value(double v, const QuantSpec& quant);

/// Per-sensor node identity. The node keeps no measurement history;
/// last_seq_seen is operator bookkeeping and never influences replies.
struct SensorState {
    int sensor_id = 0;
    std::optional<std::uint16_t> last_seq_seen;
};

enum class StoreSource { replied, silent_accepted, skipped_fill };

/// One stored sample S_t at the BS, with how it was obtained.
struct StoredValue {
    std::int64_t t = 0;
    double value_s = 0.0;
    StoreSource source = StoreSource::silent_accepted;
};

/// MSB-first bit sequence with exact length.
class BitBuffer {
public:
    void write_bits(std::uint64_t value, int nbits);
    std::size_t bit_count() const { return nbits_; }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    bool operator==(const BitBuffer& other) const {
        return nbits_ == other.nbits_ && bytes_ == other.bytes_;
    }

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t nbits_ = 0;
};

/// Reads bits back out of a BitBuffer; throws TruncatedPacket on overrun.
class BitReader {
public:
    explicit BitReader(const BitBuffer& buf) : buf_(buf) {}
    std::uint64_t read_bits(int nbits);
    std::size_t remaining() const { return buf_.bit_count() - pos_; }

private:
    const BitBuffer& buf_;
    std::size_t pos_ = 0;
};

/// The sensor's entire round: V = M - E, transmit iff V < -alpha or
/// V > alpha (strict; |V| = alpha stays silent). Pure function of the
/// request and the measurement.
std::optional<ReplyPacket> sensor_step(const SensorState& state, const RequestPacket& req,
                                       double measured_m);

/// BS store rule: S = E + V when a reply arrived, S = E on silence.
StoredValue bs_store(double e, const std::optional<ReplyPacket>& reply, std::int64_t t);

// Wire layout (MSB first):
//   request: 2-bit type tag (01) | 1-bit probe_flag | 16-bit seq
//            | value_bits-bit two's-complement E/resolution
//            | value_bits-bit unsigned alpha/resolution
//   reply:   2-bit type tag (10) | 16-bit seq | 1 sign bit
//            | 5-bit magnitude width w | w-bit |V|/resolution,
//            w = max(1, bit length of the quantized magnitude)
// Small variances therefore cost few bits; requests are fixed-width.
BitBuffer encode_request(const RequestPacket& req, const QuantSpec& quant);
RequestPacket decode_request(const BitBuffer& bits, const QuantSpec& quant);
BitBuffer encode_reply(const ReplyPacket& rep, const QuantSpec& quant);
ReplyPacket decode_reply(const BitBuffer& bits, const QuantSpec& quant);

/// Exact emitted size of encode_request; fixed at 19 + 2*value_bits bits.
int request_bit_cost(const QuantSpec& quant);

/// Exact emitted size of encode_reply for variance v; monotone
/// non-decreasing in |v|. v = 0 is never transmitted in-protocol but
/// returns the 25-bit minimum so energy accounting stays total.
int reply_bit_cost(double v, const QuantSpec& quant);

/// Size of one full-value transmission in the classical send-everything
/// scheme: type tag + seq header plus a value_bits-wide payload. Used as
/// the per-round baseline for energy comparisons.
int baseline_value_bit_cost(const QuantSpec& quant);

enum class LinkProbeResult { alive_nonzero, alive_zero, dead };

using RequestTransmit = std::function<std::optional<ReplyPacket>(const RequestPacket&)>;

/// Two-request connectivity probe. First request carries E=0, alpha=0: any
/// reply means the sensor is alive with M = V. On silence a second request
/// carries E=sentinel_l (larger than any plausible measurement), alpha=0:
/// a reply with V within tolerance of -sentinel_l means alive with M = 0.
/// Silence on both means the link is dead. A second-probe reply anywhere
/// else contradicts the first probe's silence and raises ProtocolViolation.
LinkProbeResult link_probe(const RequestTransmit& send, double sentinel_l = 1e6,
                           double tolerance = 0.0625);

} // namespace skipcast

#endif
