#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "interneuron/core/types.hpp"
#include "interneuron/core/wire.hpp"

#include <random>

using namespace interneuron;

TEST_CASE("elapsed_since examples") {
    CHECK(elapsed_since(Timestamp(1'000'000), Timestamp(1'173'000)) == us(173'000));
    CHECK(elapsed_since(Timestamp(5), Timestamp(5)) == us(0));
    // SoR clock runs 30 ms ahead; true elapsed 20 ms.
    CHECK(elapsed_since(Timestamp(1'000'000), Timestamp(1'050'000)) == us(50'000));
}

TEST_CASE("elapsed_since is antisymmetric") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::int64_t> d(-(1LL << 40), 1LL << 40);
    for (int i = 0; i < 1000; ++i) {
        const Timestamp a(d(rng)), b(d(rng));
        CHECK(elapsed_since(a, b) == -elapsed_since(b, a));
    }
}

TEST_CASE("Ratio parses decimals exactly") {
    CHECK(Ratio::parse("0.3").micros() == 300'000);
    CHECK(Ratio::parse("-1").micros() == -1'000'000);
    CHECK(Ratio::parse("+0.000001").micros() == 1);
    CHECK(Ratio::parse("2.500000000").micros() == 2'500'000);
    CHECK_THROWS_AS(Ratio::parse("1e-3"), std::invalid_argument);
    CHECK_THROWS_AS(Ratio::parse("0.0000001"), std::invalid_argument);
    CHECK_THROWS_AS(Ratio::parse(""), std::invalid_argument);
    CHECK_THROWS_AS(Ratio::parse("."), std::invalid_argument);
    CHECK_THROWS_AS(Ratio::parse("1.2.3"), std::invalid_argument);
}

TEST_CASE("Ratio prints the shortest exact decimal") {
    CHECK(Ratio::parse("0.5").str() == "0.5");
    CHECK(Ratio::parse("-0.1").str() == "-0.1");
    CHECK(Ratio::parse("3").str() == "3.0");
    CHECK(Ratio::from_micros(-1).str() == "-0.000001");
}

TEST_CASE("Ratio str/parse round-trip") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::int64_t> d(-5'000'000'000, 5'000'000'000);
    for (int i = 0; i < 1000; ++i) {
        const auto r = Ratio::from_micros(d(rng));
        CHECK(Ratio::parse(r.str()) == r);
    }
}

TEST_CASE("repeated +0.2 steps accumulate exactly") {
    Ratio x = Ratio::parse("-1");
    for (int i = 0; i < 5; ++i) x = x + Ratio::parse("0.2");
    CHECK(x == Ratio{});
}

TEST_CASE("Ratio::scale rounds half up") {
    CHECK(Ratio::parse("0.5").scale(us(3)) == us(2));
    CHECK(Ratio::parse("-0.5").scale(us(3)) == us(-1));
    CHECK(Ratio::parse("0.7").scale(ms(120)) == ms(84));
    // Integer shifts commute with scaling by an integer ratio.
    CHECK(Ratio::parse("2").scale(ms(5) + us(1)) == Ratio::parse("2").scale(ms(5)) + us(2));
}

TEST_CASE("Ratio::of") {
    CHECK(Ratio::of(ms(65), ms(130)) == Ratio::parse("0.5"));
    CHECK(Ratio::of(ms(-1), ms(3)).micros() == -333'333);
    CHECK(Ratio::of(us(2), us(3)).micros() == 666'667);
    CHECK_THROWS_AS(Ratio::of(ms(1), us(0)), ContractError);
}

namespace {

MessageHeader random_header(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::int64_t> i64(-(1LL << 50), 1LL << 50);
    std::uniform_real_distribution<double> f(0.0, 100.0);
    std::uniform_int_distribution<int> kind(0, 3), bit(0, 1);
    MessageHeader h;
    h.round_id = static_cast<std::uint64_t>(i64(rng) & 0xffffffffff);
    h.t0 = Timestamp(i64(rng));
    h.indicator = bit(rng) == 1;
    h.x = Ratio::from_micros(i64(rng) % 3'000'000);
    h.qos.max_e2e_deadline = us(i64(rng));
    h.qos.min_bandwidth = i64(rng);
    h.qos.security_floor = f(rng);
    h.qos.reliability_floor = f(rng);
    h.payload.kind = static_cast<PayloadKind>(kind(rng));
    h.payload.size_bytes = i64(rng);
    h.payload.accuracy_factor = Ratio::from_micros(i64(rng) % 1'000'000);
    h.payload.ap = f(rng) / 100;
    h.payload.ar = f(rng) / 100;
    h.mode = bit(rng) ? TransmitMode::Normal : TransmitMode::DegradedSampledOnly;
    return h;
}

}  // namespace

TEST_CASE("header encode/decode is identity") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 1000; ++i) {
        const auto h = random_header(rng);
        const auto bytes = wire::encode(h);
        REQUIRE(bytes.size() == wire::kEncodedSize);
        CHECK(wire::decode(bytes) == h);
    }
}

TEST_CASE("header decoding rejects malformed input") {
    std::mt19937_64 rng(1);
    const auto good = wire::encode(random_header(rng));

    auto truncated = good;
    truncated.pop_back();
    CHECK_THROWS_AS(wire::decode(truncated), wire::DecodeError);

    auto trailing = good;
    trailing.push_back(0);
    CHECK_THROWS_AS(wire::decode(trailing), wire::DecodeError);

    auto magic = good;
    magic[0] ^= 0xff;
    CHECK_THROWS_AS(wire::decode(magic), wire::DecodeError);

    auto version = good;
    version[4] = 99;
    CHECK_THROWS_AS(wire::decode(version), wire::DecodeError);

    auto indicator = good;
    indicator[4 + 1 + 8 + 8] = 7;
    CHECK_THROWS_AS(wire::decode(indicator), wire::DecodeError);

    auto mode = good;
    mode.at(wire::kEncodedSize - 1) = 9;
    CHECK_THROWS_AS(wire::decode(mode), wire::DecodeError);
}

TEST_CASE("header layout is little-endian") {
    MessageHeader h;
    h.round_id = 0x0102030405060708ULL;
    const auto b = wire::encode(h);
    CHECK(b[0] == 0x49);  // 'I'
    CHECK(b[5] == 0x08);
    CHECK(b[12] == 0x01);
}

TEST_CASE("payload kind names round-trip") {
    for (auto k : {PayloadKind::RawFrame, PayloadKind::SampledFrame, PayloadKind::Result, PayloadKind::BackupResult}) {
        CHECK(payload_kind_from_string(to_string(k)) == k);
    }
}
