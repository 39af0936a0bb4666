#include <doctest.h>

#include <sstream>

#include "ttlkit/pingback.hpp"

using namespace ttlkit;

namespace {

ProbeState ingest(const std::string& targets_csv, const std::string& replies_csv,
                  int offset = 3) {
    std::istringstream targets(targets_csv);
    std::istringstream replies(replies_csv);
    return ingest_probes(targets, replies, offset);
}

const std::string kTargets =
    "run_id,ip\n"
    "run001,1.1.1.1\nrun001,2.2.2.2\nrun001,3.3.3.3\n"
    "run002,1.1.1.1\nrun002,2.2.2.2\nrun002,3.3.3.3\n"
    "run003,1.1.1.1\nrun003,2.2.2.2\nrun003,3.3.3.3\n";

}  // namespace

TEST_CASE("offset correction applies to every reply") {
    auto state = ingest(kTargets, "run001,1000,1.1.1.1,47\n");
    const auto& run = state.ips.at(IpKey::parse("1.1.1.1")).runs.at("run001");
    CHECK(run.corrected_ttls == std::set<uint8_t>{50});
    CHECK(run.reply_count == 1);
    CHECK(state.offset == 3);
}

TEST_CASE("corrected TTL above 255 is a hard error") {
    CHECK_THROWS_AS(ingest(kTargets, "run001,1000,1.1.1.1,254\n"), OffsetOverflow);
    // 252 + 3 = 255 is still fine
    CHECK_NOTHROW(ingest(kTargets, "run001,1000,1.1.1.1,252\n"));
}

TEST_CASE("replies for untargeted IPs are quarantined") {
    auto state = ingest(kTargets,
                        "run001,1,1.1.1.1,47\n"
                        "run001,2,9.9.9.9,47\n"
                        "run009,3,1.1.1.1,47\n");  // unknown run also quarantines
    CHECK(state.ips.size() == 1);
    REQUIRE(state.quarantine.size() == 2);
    CHECK(state.quarantine[0].ip == IpKey::parse("9.9.9.9"));
    CHECK(state.quarantine[1].run_id == "run009");
}

TEST_CASE("run ttl histogram counts (ip, run) cells") {
    auto state = ingest(kTargets,
                        "run001,1,1.1.1.1,47\n"
                        "run001,2,1.1.1.1,47\n"   // duplicate TTL, same cell
                        "run001,3,2.2.2.2,47\n"
                        "run001,4,2.2.2.2,50\n"   // second TTL in the same run
                        "run002,5,1.1.1.1,47\n");
    auto hist = run_ttl_counts(state);
    CHECK(hist[1] == 2);
    CHECK(hist[2] == 1);
    CHECK(state.ips.at(IpKey::parse("1.1.1.1")).runs.at("run001").reply_count == 2);
}

TEST_CASE("longitudinal classes") {
    auto state = ingest(kTargets,
                        // 1.1.1.1: same TTL in all runs -> Stable
                        "run001,1,1.1.1.1,47\nrun002,2,1.1.1.1,47\nrun003,3,1.1.1.1,47\n"
                        // 2.2.2.2: single TTL per run, changes across runs -> BinStable
                        "run001,4,2.2.2.2,47\nrun002,5,2.2.2.2,44\nrun003,6,2.2.2.2,47\n"
                        // 3.3.3.3: two TTLs inside run002 -> BinUnstable
                        "run001,7,3.3.3.3,47\nrun002,8,3.3.3.3,47\nrun002,9,3.3.3.3,44\n");
    CHECK(longitudinal(state, IpKey::parse("1.1.1.1")) == LongitudinalClass::Stable);
    CHECK(longitudinal(state, IpKey::parse("2.2.2.2")) == LongitudinalClass::BinStable);
    CHECK(longitudinal(state, IpKey::parse("3.3.3.3")) == LongitudinalClass::BinUnstable);
    CHECK_THROWS_AS(longitudinal(state, IpKey::parse("8.8.8.8")), UnknownProbeIp);
}

TEST_CASE("anchor exists only for Stable IPs") {
    auto state = ingest(kTargets,
                        "run001,1,1.1.1.1,47\nrun002,2,1.1.1.1,47\n"
                        "run001,3,2.2.2.2,47\nrun002,4,2.2.2.2,44\n");
    auto a = anchor(state, IpKey::parse("1.1.1.1"));
    REQUIRE(a.has_value());
    CHECK(a->ttl == 50);
    CHECK(a->hop.start == 64);
    CHECK(a->hop.hop_count == 14);
    CHECK(!anchor(state, IpKey::parse("2.2.2.2")).has_value());
}

TEST_CASE("cross correlation partitions the passive population") {
    auto state = ingest(kTargets,
                        "run001,1,1.1.1.1,47\nrun002,2,1.1.1.1,47\n"
                        "run001,3,2.2.2.2,47\nrun002,4,2.2.2.2,44\n"
                        "run001,5,3.3.3.3,47\nrun001,6,3.3.3.3,44\n");
    std::set<IpKey> passive{IpKey::parse("1.1.1.1"), IpKey::parse("2.2.2.2"),
                            IpKey::parse("3.3.3.3"), IpKey::parse("7.7.7.7")};
    auto report = cross_correlate(passive, state);
    CHECK(report.passive_multi_ttl == 4);
    CHECK(report.one_ttl == 1);
    CHECK(report.bin_stable == 1);
    CHECK(report.bin_unstable == 1);
    CHECK(report.no_response == 1);
    CHECK(report.one_ttl + report.bin_stable + report.bin_unstable + report.no_response ==
          report.passive_multi_ttl);
}

TEST_CASE("malformed probe inputs raise parse errors") {
    CHECK_THROWS_AS(ingest(kTargets, "run001,1,1.1.1.1\n"), ParseError);
    CHECK_THROWS_AS(ingest(kTargets, "run001,1,1.1.1.1,300\n"), ParseError);
    CHECK_THROWS_AS(ingest(kTargets, "run001,x,1.1.1.1,47\n"), ParseError);
    CHECK_THROWS_AS(ingest("run001\n", ""), ParseError);
}
