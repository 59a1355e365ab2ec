#include "skipcast/protocol.hpp"

#include <bit>
#include <cmath>

#include "skipcast/errors.hpp"

namespace skipcast {

namespace {

constexpr std::uint64_t kRequestTag = 0b01;
constexpr std::uint64_t kReplyTag = 0b10;

// Quantize to grid units, rejecting values the integer grid cannot hold.
std::int64_t to_grid(double v, double resolution) {
    if (!std::isfinite(v)) throw ValueOverflow("non-finite field value");
    const double scaled = v / resolution;
    if (std::abs(scaled) >= 0x1.0p62) throw ValueOverflow("value far outside grid range");
    return std::llround(scaled);
}

int bit_length(std::uint64_t v) {
    return v == 0 ? 0 : 64 - std::countl_zero(v);
}

void check_quant(const QuantSpec& quant) {
    if (!quant.valid()) throw ValueOverflow("invalid quantization spec");
}

} // namespace

void BitBuffer::write_bits(std::uint64_t value, int nbits) {
    for (int i = nbits - 1; i >= 0; --i) {
        if (nbits_ % 8 == 0) bytes_.push_back(0);
        const std::uint8_t bit = static_cast<std::uint8_t>((value >> i) & 1u);
        bytes_.back() = static_cast<std::uint8_t>(bytes_.back() | (bit << (7 - nbits_ % 8)));
        ++nbits_;
    }
}

std::uint64_t BitReader::read_bits(int nbits) {
    if (remaining() < static_cast<std::size_t>(nbits))
        throw TruncatedPacket("packet shorter than its layout");
    std::uint64_t value = 0;
    for (int i = 0; i < nbits; ++i, ++pos_) {
        const std::uint8_t byte = buf_.bytes()[pos_ / 8];
        value = (value << 1) | ((byte >> (7 - pos_ % 8)) & 1u);
    }
    return value;
}

double quantize_value(double v, const QuantSpec& quant) {
    return static_cast<double>(to_grid(v, quant.resolution)) * quant.resolution;
}

std::optional<ReplyPacket> sensor_step(const SensorState& state, const RequestPacket& req,
                                       double measured_m) {
    (void)state;
    const double v = measured_m - req.predicted_e;
    if (v < -req.alpha || v > req.alpha) return ReplyPacket{req.seq, v};
    return std::nullopt;
}

StoredValue bs_store(double e, const std::optional<ReplyPacket>& reply, std::int64_t t) {
    if (reply) return StoredValue{t, e + reply->variance_v, StoreSource::replied};
    return StoredValue{t, e, StoreSource::silent_accepted};
}

BitBuffer encode_request(const RequestPacket& req, const QuantSpec& quant) {
    check_quant(quant);
    const std::int64_t e_grid = to_grid(req.predicted_e, quant.resolution);
    const std::int64_t e_min = -(std::int64_t{1} << (quant.value_bits - 1));
    const std::int64_t e_max = (std::int64_t{1} << (quant.value_bits - 1)) - 1;
    if (e_grid < e_min || e_grid > e_max)
        throw ValueOverflow("predicted value exceeds request field width");

    if (!(req.alpha >= 0.0)) throw ValueOverflow("alpha must be >= 0");
    const std::int64_t a_grid = to_grid(req.alpha, quant.resolution);
    const std::int64_t a_max = (std::int64_t{1} << quant.value_bits) - 1;
    if (a_grid > a_max) throw ValueOverflow("alpha exceeds request field width");

    const std::uint64_t e_mask = quant.value_bits == 64
                                     ? ~std::uint64_t{0}
                                     : (std::uint64_t{1} << quant.value_bits) - 1;
    BitBuffer bits;
    bits.write_bits(kRequestTag, 2);
    bits.write_bits(req.probe_flag ? 1 : 0, 1);
    bits.write_bits(req.seq, 16);
    bits.write_bits(static_cast<std::uint64_t>(e_grid) & e_mask, quant.value_bits);
    bits.write_bits(static_cast<std::uint64_t>(a_grid), quant.value_bits);
    return bits;
}

RequestPacket decode_request(const BitBuffer& bits, const QuantSpec& quant) {
    check_quant(quant);
    BitReader reader(bits);
    if (reader.read_bits(2) != kRequestTag) throw BadTypeTag("not a request packet");

    RequestPacket req;
    req.probe_flag = reader.read_bits(1) != 0;
    req.seq = static_cast<std::uint16_t>(reader.read_bits(16));

    std::uint64_t raw_e = reader.read_bits(quant.value_bits);
    // Sign-extend the two's-complement field.
    if (quant.value_bits < 64 && (raw_e >> (quant.value_bits - 1)) != 0)
        raw_e |= ~((std::uint64_t{1} << quant.value_bits) - 1);
    req.predicted_e = static_cast<double>(static_cast<std::int64_t>(raw_e)) * quant.resolution;

    req.alpha = static_cast<double>(reader.read_bits(quant.value_bits)) * quant.resolution;
    return req;
}

BitBuffer encode_reply(const ReplyPacket& rep, const QuantSpec& quant) {
    check_quant(quant);
    const std::int64_t grid = to_grid(rep.variance_v, quant.resolution);
    const std::uint64_t mag = static_cast<std::uint64_t>(grid < 0 ? -grid : grid);
    const int mag_bits = bit_length(mag);
    // The 5-bit width field caps the magnitude at 31 bits regardless of
    // max_mag_bits.
    if (mag_bits > quant.max_mag_bits || mag_bits > 31)
        throw ValueOverflow("variance magnitude exceeds width cap");
    const int w = mag_bits < 1 ? 1 : mag_bits;

    BitBuffer bits;
    bits.write_bits(kReplyTag, 2);
    bits.write_bits(rep.seq, 16);
    bits.write_bits(grid < 0 ? 1 : 0, 1);
    bits.write_bits(static_cast<std::uint64_t>(w), 5);
    bits.write_bits(mag, w);
    return bits;
}

ReplyPacket decode_reply(const BitBuffer& bits, const QuantSpec& quant) {
    check_quant(quant);
    BitReader reader(bits);
    if (reader.read_bits(2) != kReplyTag) throw BadTypeTag("not a reply packet");

    ReplyPacket rep;
    rep.seq = static_cast<std::uint16_t>(reader.read_bits(16));
    const bool negative = reader.read_bits(1) != 0;
    const int w = static_cast<int>(reader.read_bits(5));
    if (w == 0) throw TruncatedPacket("zero-width variance field");
    const std::uint64_t mag = reader.read_bits(w);
    rep.variance_v = (negative ? -1.0 : 1.0) * static_cast<double>(mag) * quant.resolution;
    return rep;
}

int request_bit_cost(const QuantSpec& quant) {
    return 2 + 1 + 16 + 2 * quant.value_bits;
}

int reply_bit_cost(double v, const QuantSpec& quant) {
    check_quant(quant);
    const std::int64_t grid = to_grid(v, quant.resolution);
    const std::uint64_t mag = static_cast<std::uint64_t>(grid < 0 ? -grid : grid);
    const int mag_bits = bit_length(mag);
    if (mag_bits > quant.max_mag_bits || mag_bits > 31)
        throw ValueOverflow("variance magnitude exceeds width cap");
    return 2 + 16 + 1 + 5 + (mag_bits < 1 ? 1 : mag_bits);
}

int baseline_value_bit_cost(const QuantSpec& quant) {
    return 2 + 16 + quant.value_bits;
}

LinkProbeResult link_probe(const RequestTransmit& send, double sentinel_l, double tolerance) {
    const auto first = send(RequestPacket{0, 0.0, 0.0, true});
    if (first) return LinkProbeResult::alive_nonzero;

    const auto second = send(RequestPacket{1, sentinel_l, 0.0, true});
    if (!second) return LinkProbeResult::dead;

    // First-probe silence pins M to 0, so the only compliant second reply
    // is V = -sentinel_l.
    if (std::abs(second->variance_v + sentinel_l) <= tolerance) return LinkProbeResult::alive_zero;
    throw ProtocolViolation("second probe reply inconsistent with first-probe silence");
}

} // namespace skipcast
