#include <doctest.h>

#include <random>
#include <sstream>

#include "ttlkit/record.hpp"

using namespace ttlkit;

TEST_CASE("parse_record maps fields directly") {
    auto rec = parse_record("1454544000000000,203.0.113.7,6,443,52100,50");
    CHECK(rec.ts_us == 1454544000000000);
    CHECK(rec.ip.to_string() == "203.0.113.7");
    CHECK(rec.ip.family == Family::v4);
    CHECK(rec.proto == 6);
    CHECK(rec.ext_port == 443);
    CHECK(rec.int_port == 52100);
    CHECK(rec.ttl == 50);
}

TEST_CASE("parse_record handles IPv6") {
    auto rec = parse_record("1454544000000000,2001:db8::1,58,0,0,249");
    CHECK(rec.ip.family == Family::v6);
    CHECK(rec.ip.to_string() == "2001:db8::1");
    CHECK(rec.ttl == 249);
}

TEST_CASE("parse_record rejects out-of-range fields") {
    CHECK_THROWS_AS(parse_record("0,1.2.3.4,6,1,1,256"), ParseError);
    CHECK_THROWS_AS(parse_record("0,1.2.3.4,256,1,1,64"), ParseError);
    CHECK_THROWS_AS(parse_record("0,1.2.3.4,6,65536,1,64"), ParseError);
    CHECK_THROWS_AS(parse_record("-1,1.2.3.4,6,1,1,64"), ParseError);
    CHECK_THROWS_AS(parse_record("0,not-an-ip,6,1,1,64"), ParseError);
    CHECK_THROWS_AS(parse_record("0,1.2.3.4,6,1,64"), ParseError);
    CHECK_THROWS_AS(parse_record(""), ParseError);
}

TEST_CASE("parse error carries line and column") {
    try {
        parse_record("0,1.2.3.4,6,1,1,300", 17);
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.line() == 17);
        CHECK(e.column() == "ttl");
    }
}

TEST_CASE("ttl zero is accepted as data") {
    CHECK(parse_record("0,1.2.3.4,6,1,1,0").ttl == 0);
}

TEST_CASE("v6 addresses canonicalize to RFC 5952 form") {
    auto key = IpKey::parse("2001:0DB8:0000:0000:0000:0000:0000:0001");
    CHECK(key.to_string() == "2001:db8::1");
}

TEST_CASE("serialize round-trips canonical lines") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 200; ++i) {
        PacketRecord rec;
        rec.ts_us = static_cast<int64_t>(rng() % (1LL << 50));
        rec.ip.family = rng() % 2 ? Family::v4 : Family::v6;
        for (size_t b = 0; b < rec.ip.byte_count(); ++b)
            rec.ip.bytes[b] = static_cast<uint8_t>(rng());
        rec.proto = static_cast<uint8_t>(rng());
        rec.ext_port = static_cast<uint16_t>(rng());
        rec.int_port = static_cast<uint16_t>(rng());
        rec.ttl = static_cast<uint8_t>(rng());
        const std::string line = serialize_record(rec);
        CHECK(parse_record(line) == rec);
        CHECK(serialize_record(parse_record(line)) == line);
    }
}

TEST_CASE("reader yields records in order and skips header") {
    std::istringstream in(
        "ts_us,ip,proto,ext_port,int_port,ttl\n"
        "0,1.2.3.4,6,1,1,64\n"
        "1,1.2.3.5,17,2,2,128\n"
        "2,1.2.3.6,6,3,3,32\n");
    RecordReader reader(in);
    CHECK(reader.next()->ts_us == 0);
    CHECK(reader.next()->ts_us == 1);
    CHECK(reader.next()->ts_us == 2);
    CHECK(!reader.next());
}

TEST_CASE("empty stream yields nothing") {
    std::istringstream in("");
    RecordReader reader(in);
    CHECK(!reader.next());
}

TEST_CASE("skip policy counts bad rows; strict throws") {
    const char* data =
        "0,1.2.3.4,6,1,1,64\n"
        "garbage line\n"
        "2,1.2.3.6,6,3,3,32\n";
    {
        std::istringstream in(data);
        RecordReader reader(in, ReadPolicy::skip_and_count);
        int n = 0;
        while (reader.next()) ++n;
        CHECK(n == 2);
        CHECK(reader.skipped() == 1);
    }
    {
        std::istringstream in(data);
        RecordReader reader(in, ReadPolicy::strict);
        reader.next();
        CHECK_THROWS_AS(reader.next(), ParseError);
    }
}
