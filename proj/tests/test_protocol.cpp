#include <cmath>
#include <cstdint>
#include <optional>

#include <doctest.h>

#include "skipcast/errors.hpp"
#include "skipcast/protocol.hpp"
#include "skipcast/rng.hpp"

using namespace skipcast;

namespace {
const QuantSpec kDefaults{}; // resolution 2^-4, 16-bit values, 24-bit magnitudes
}

TEST_CASE("BitBuffer packs MSB-first with exact length") {
    BitBuffer buf;
    buf.write_bits(0b101, 3);
    buf.write_bits(0b01, 2);
    CHECK(buf.bit_count() == 5);
    REQUIRE(buf.bytes().size() == 1);
    CHECK(buf.bytes()[0] == 0xA8); // 10101 padded with zeros

    BitBuffer wide;
    wide.write_bits(0xBEEF, 16);
    CHECK(wide.bit_count() == 16);
    REQUIRE(wide.bytes().size() == 2);
    CHECK(wide.bytes()[0] == 0xBE);
    CHECK(wide.bytes()[1] == 0xEF);
}

TEST_CASE("BitReader returns written values and guards overrun") {
    BitBuffer buf;
    buf.write_bits(0x2B, 6);
    buf.write_bits(0x1, 1);
    BitReader reader(buf);
    CHECK(reader.read_bits(6) == 0x2B);
    CHECK(reader.read_bits(1) == 0x1);
    CHECK_THROWS_AS(reader.read_bits(1), TruncatedPacket);
}

TEST_CASE("quantize_value rounds to the nearest grid step") {
    CHECK(quantize_value(0.03, kDefaults) == 0.0);
    CHECK(quantize_value(0.05, kDefaults) == 0.0625);
    CHECK(quantize_value(-0.04, kDefaults) == -0.0625);
    CHECK(quantize_value(1.0, kDefaults) == 1.0);
    // Ties round away from zero (llround semantics).
    CHECK(quantize_value(2.53125, kDefaults) == 2.5625);
    CHECK(quantize_value(-2.53125, kDefaults) == -2.5625);
}

TEST_CASE("request encoding: fixed width, exact field round-trip") {
    const RequestPacket req{258, 2.5, 1.0, false};
    const BitBuffer bits = encode_request(req, kDefaults);
    CHECK(static_cast<int>(bits.bit_count()) == 51); // 2 tag + 1 probe + 16 seq + 16 E + 16 alpha
    CHECK(request_bit_cost(kDefaults) == 51);

    const RequestPacket back = decode_request(bits, kDefaults);
    CHECK(back.seq == 258);
    CHECK(back.probe_flag == false);
    CHECK(back.predicted_e == 2.5);
    CHECK(back.alpha == 1.0);
}

TEST_CASE("request encoding: negative E and probe flag survive") {
    const RequestPacket req{65535, -2.5, 0.0625, true};
    const RequestPacket back = decode_request(encode_request(req, kDefaults), kDefaults);
    CHECK(back.seq == 65535);
    CHECK(back.probe_flag == true);
    CHECK(back.predicted_e == -2.5);
    CHECK(back.alpha == 0.0625);
}

TEST_CASE("request encoding rejects out-of-range fields") {
    // E grid 48000 exceeds the signed 16-bit field.
    CHECK_THROWS_AS(encode_request(RequestPacket{1, 3000.0, 1.0, false}, kDefaults),
                    ValueOverflow);
    CHECK_THROWS_AS(encode_request(RequestPacket{1, 0.0, -0.5, false}, kDefaults), ValueOverflow);
    // Alpha grid 65536 exceeds the unsigned 16-bit field.
    CHECK_THROWS_AS(encode_request(RequestPacket{1, 0.0, 4096.0, false}, kDefaults),
                    ValueOverflow);
}

TEST_CASE("reply encoding: width tracks the magnitude") {
    // |V| = 0.5 -> grid 8 -> 4 magnitude bits -> 2+16+1+5+4 = 28 bits.
    const BitBuffer half = encode_reply(ReplyPacket{7, 0.5}, kDefaults);
    CHECK(static_cast<int>(half.bit_count()) == 28);
    CHECK(reply_bit_cost(0.5, kDefaults) == 28);

    // The one-step magnitude is the 25-bit floor.
    CHECK(reply_bit_cost(0.0625, kDefaults) == 25);
    CHECK(reply_bit_cost(0.0, kDefaults) == 25);
    CHECK(reply_bit_cost(-0.0625, kDefaults) == 25);

    // Monotone non-decreasing in |v|.
    int prev = 0;
    for (double v : {0.0, 0.0625, 0.2, 0.5, 1.0, 10.0, 100.0, 1000.0}) {
        const int cost = reply_bit_cost(v, kDefaults);
        CHECK(cost >= prev);
        CHECK(cost == static_cast<int>(encode_reply(ReplyPacket{0, v}, kDefaults).bit_count()));
        prev = cost;
    }
}

TEST_CASE("reply encoding: sign and magnitude round-trip") {
    for (double v : {0.5, -0.5, 0.0, -0.0625, 1023.9375, -1023.9375, 0.03, -0.03}) {
        const ReplyPacket back = decode_reply(encode_reply(ReplyPacket{42, v}, kDefaults), kDefaults);
        CHECK(back.seq == 42);
        CHECK(back.variance_v == quantize_value(v, kDefaults));
    }
}

TEST_CASE("reply encoding rejects magnitudes beyond max_mag_bits") {
    // grid 2^24 needs 25 bits; the cap is 24.
    const double too_big = std::ldexp(1.0, 24) * kDefaults.resolution;
    CHECK_THROWS_AS(encode_reply(ReplyPacket{0, too_big}, kDefaults), ValueOverflow);
    CHECK_NOTHROW(encode_reply(ReplyPacket{0, too_big - kDefaults.resolution}, kDefaults));
}

TEST_CASE("type tags are enforced") {
    const BitBuffer req = encode_request(RequestPacket{1, 1.0, 1.0, false}, kDefaults);
    const BitBuffer rep = encode_reply(ReplyPacket{1, 1.0}, kDefaults);
    CHECK_THROWS_AS(decode_reply(req, kDefaults), BadTypeTag);
    CHECK_THROWS_AS(decode_request(rep, kDefaults), BadTypeTag);
}

TEST_CASE("truncated packets are detected") {
    BitBuffer stub;
    stub.write_bits(0b01, 2); // request tag, then nothing
    CHECK_THROWS_AS(decode_request(stub, kDefaults), TruncatedPacket);

    BitBuffer rep_stub;
    rep_stub.write_bits(0b10, 2);
    rep_stub.write_bits(0, 10);
    CHECK_THROWS_AS(decode_reply(rep_stub, kDefaults), TruncatedPacket);
}

TEST_CASE("sensor_step: strict reply rule, silence at the boundary") {
    const SensorState sensor{3, std::nullopt};
    const RequestPacket req{9, 5.0, 1.0, false};

    CHECK_FALSE(sensor_step(sensor, req, 5.0).has_value());
    CHECK_FALSE(sensor_step(sensor, req, 6.0).has_value());  // V = +alpha stays silent
    CHECK_FALSE(sensor_step(sensor, req, 4.0).has_value());  // V = -alpha stays silent

    const auto over = sensor_step(sensor, req, 6.5);
    REQUIRE(over.has_value());
    CHECK(over->seq == 9);
    CHECK(over->variance_v == 1.5);

    const auto under = sensor_step(sensor, req, 3.0);
    REQUIRE(under.has_value());
    CHECK(under->variance_v == -2.0);
}

TEST_CASE("bs_store applies S = E + V on reply, S = E on silence") {
    const StoredValue replied = bs_store(2.0, ReplyPacket{0, -1.5}, 17);
    CHECK(replied.t == 17);
    CHECK(replied.value_s == 0.5);
    CHECK(replied.source == StoreSource::replied);

    const StoredValue silent = bs_store(2.0, std::nullopt, 18);
    CHECK(silent.t == 18);
    CHECK(silent.value_s == 2.0);
    CHECK(silent.source == StoreSource::silent_accepted);
}

TEST_CASE("baseline transmission cost is header plus one full value") {
    CHECK(baseline_value_bit_cost(kDefaults) == 34); // 18-bit header + 16-bit value

    QuantSpec wide = kDefaults;
    wide.value_bits = 24;
    CHECK(baseline_value_bit_cost(wide) == 42);
}

TEST_CASE("randomized codec round-trip with re-encode identity") {
    Rng rng(4242);
    for (int i = 0; i < 2000; ++i) {
        QuantSpec quant;
        quant.resolution = (i % 3 == 0) ? 0.0625 : (i % 3 == 1 ? 0.5 : 0.01);
        const double e_limit = (std::ldexp(1.0, quant.value_bits - 1) - 1.0) * quant.resolution;

        const RequestPacket req{static_cast<std::uint16_t>(rng.uniform_int(0, 65535)),
                                rng.uniform(-e_limit, e_limit),
                                rng.uniform(0.0, e_limit), rng.uniform01() < 0.5};
        const BitBuffer req_bits = encode_request(req, quant);
        const RequestPacket req_back = decode_request(req_bits, quant);
        CHECK(req_back.seq == req.seq);
        CHECK(req_back.probe_flag == req.probe_flag);
        CHECK(req_back.predicted_e == quantize_value(req.predicted_e, quant));
        CHECK(req_back.alpha == quantize_value(req.alpha, quant));
        CHECK(encode_request(req_back, quant) == req_bits);

        const ReplyPacket rep{static_cast<std::uint16_t>(rng.uniform_int(0, 65535)),
                              rng.uniform(-1000.0, 1000.0)};
        const BitBuffer rep_bits = encode_reply(rep, quant);
        const ReplyPacket rep_back = decode_reply(rep_bits, quant);
        CHECK(rep_back.seq == rep.seq);
        CHECK(rep_back.variance_v == quantize_value(rep.variance_v, quant));
        CHECK(encode_reply(rep_back, quant) == rep_bits);
    }
}

TEST_CASE("link_probe classifies the three sensor behaviors") {
    const SensorState sensor{0, std::nullopt};

    SUBCASE("alive with a nonzero measurement") {
        auto send = [&](const RequestPacket& req) { return sensor_step(sensor, req, 25.0); };
        CHECK(link_probe(send) == LinkProbeResult::alive_nonzero);
    }
    SUBCASE("alive with exactly zero") {
        auto send = [&](const RequestPacket& req) { return sensor_step(sensor, req, 0.0); };
        CHECK(link_probe(send) == LinkProbeResult::alive_zero);
    }
    SUBCASE("dead link") {
        auto send = [](const RequestPacket&) { return std::optional<ReplyPacket>{}; };
        CHECK(link_probe(send) == LinkProbeResult::dead);
    }
    SUBCASE("inconsistent second reply is a protocol violation") {
        auto send = [](const RequestPacket& req) -> std::optional<ReplyPacket> {
            if (req.predicted_e == 0.0) return std::nullopt; // silent on the first probe
            return ReplyPacket{req.seq, 123.0};              // nonsense on the sentinel probe
        };
        CHECK_THROWS_AS(link_probe(send), ProtocolViolation);
    }
}
