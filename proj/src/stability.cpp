#include "ttlkit/stability.hpp"

#include <set>
#include <sstream>

#include <json.hpp>

#include "ttlkit/hopcount.hpp"

namespace ttlkit {

const char* to_string(StabilityLeaf leaf) {
    switch (leaf) {
        case StabilityLeaf::B1_SinglePacket: return "B1_SinglePacket";
        case StabilityLeaf::C1_SingleTTL: return "C1_SingleTTL";
        case StabilityLeaf::D1_MultiTTL_SingleBin: return "D1_MultiTTL_SingleBin";
        case StabilityLeaf::E1_SectionStable: return "E1_SectionStable";
        case StabilityLeaf::E2_Overlapping: return "E2_Overlapping";
    }
    return "?";
}

bool section_stable(const IpState& state, MixbinAdjacency adjacency) {
    bool prev_mix = false;
    BinIndex prev_bin = 0;
    bool first = true;
    for (auto& [bin, bs] : state.bins) {
        const bool mix = bs.is_mixbin();
        if (!first && prev_mix && mix) {
            if (adjacency == MixbinAdjacency::activity_order || bin == prev_bin + 1)
                return false;
        }
        prev_mix = mix;
        prev_bin = bin;
        first = false;
    }
    return true;
}

namespace {

bool single_hop_count(const IpState& state) {
    std::set<uint8_t> hcs;
    for (uint8_t ttl : state.distinct_ttls()) hcs.insert(hopcount::estimate(ttl).hop_count);
    return hcs.size() == 1;
}

}  // namespace

StabilityClass classify(const IpState& state, MixbinAdjacency adjacency) {
    const bool hc_single = single_hop_count(state);
    if (state.packet_count == 1)
        return {StabilityLeaf::B1_SinglePacket, hc_single};
    if (state.distinct_ttls().size() == 1)
        return {StabilityLeaf::C1_SingleTTL, hc_single};
    if (state.active_bin_count() == 1)
        return {StabilityLeaf::D1_MultiTTL_SingleBin, hc_single};
    if (section_stable(state, adjacency))
        return {StabilityLeaf::E1_SectionStable, hc_single};
    return {StabilityLeaf::E2_Overlapping, hc_single};
}

int ttl_amplitude(const IpState& state) {
    auto ttls = state.distinct_ttls();
    if (ttls.empty()) return 0;
    return *ttls.rbegin() - *ttls.begin();
}

int hc_amplitude(const IpState& state) {
    int lo = 256, hi = -1;
    for (uint8_t ttl : state.distinct_ttls()) {
        const int hc = hopcount::estimate(ttl).hop_count;
        lo = std::min(lo, hc);
        hi = std::max(hi, hc);
    }
    return hi < 0 ? 0 : hi - lo;
}

StabilityReport summarize(const StateTable& table, MixbinAdjacency adjacency) {
    StabilityReport report;
    for (auto& [key, st] : table.ips()) {
        LeafCounts& c = key.family == Family::v4 ? report.v4 : report.v6;
        ++c.total;
        const StabilityClass cls = classify(st, adjacency);
        switch (cls.leaf) {
            case StabilityLeaf::B1_SinglePacket:
                ++c.b1;
                continue;
            case StabilityLeaf::C1_SingleTTL:
                ++c.b2;
                ++c.c1;
                continue;
            case StabilityLeaf::D1_MultiTTL_SingleBin:
                ++c.b2;
                ++c.c2;
                ++c.d1;
                c.d1_hc_single += cls.hc_single;
                continue;
            case StabilityLeaf::E1_SectionStable:
                ++c.b2;
                ++c.c2;
                ++c.d2;
                ++c.e1;
                c.e1_hc_single += cls.hc_single;
                continue;
            case StabilityLeaf::E2_Overlapping:
                ++c.b2;
                ++c.c2;
                ++c.d2;
                ++c.e2;
                c.e2_hc_single += cls.hc_single;
                continue;
        }
    }
    return report;
}

double pct(uint64_t part, uint64_t base) {
    return base == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(base);
}

namespace {

nlohmann::json counts_to_json(const LeafCounts& c) {
    using nlohmann::json;
    json j;
    j["A_all"] = c.total;
    j["B1_single_packet"] = {{"count", c.b1}, {"pct_of_all", pct(c.b1, c.total)}};
    j["B2_multi_packet"] = {{"count", c.b2}, {"pct_of_all", pct(c.b2, c.total)}};
    j["C1_single_ttl"] = {{"count", c.c1}, {"pct_of_multi_packet", pct(c.c1, c.b2)}};
    j["C2_multi_ttl"] = {{"count", c.c2}, {"pct_of_multi_packet", pct(c.c2, c.b2)}};
    j["D1_single_bin"] = {{"count", c.d1},
                          {"pct_of_multi_packet", pct(c.d1, c.b2)},
                          {"hc_single", c.d1_hc_single},
                          {"hc_multi", c.d1 - c.d1_hc_single}};
    j["D2_multi_bin"] = {{"count", c.d2}, {"pct_of_multi_packet", pct(c.d2, c.b2)}};
    j["E1_section_stable"] = {{"count", c.e1},
                              {"pct_of_multi_packet", pct(c.e1, c.b2)},
                              {"hc_single", c.e1_hc_single},
                              {"hc_multi", c.e1 - c.e1_hc_single}};
    j["E2_overlapping"] = {{"count", c.e2},
                           {"pct_of_multi_packet", pct(c.e2, c.b2)},
                           {"hc_single", c.e2_hc_single},
                           {"hc_multi", c.e2 - c.e2_hc_single}};
    return j;
}

void counts_to_csv(std::ostringstream& out, const LeafCounts& c, const char* family) {
    auto row = [&](const char* cat, uint64_t count, double share) {
        out << family << ',' << cat << ',' << count << ',' << share << '\n';
    };
    row("A_all", c.total, 100.0);
    row("B1_single_packet", c.b1, pct(c.b1, c.total));
    row("B2_multi_packet", c.b2, pct(c.b2, c.total));
    row("C1_single_ttl", c.c1, pct(c.c1, c.b2));
    row("C2_multi_ttl", c.c2, pct(c.c2, c.b2));
    row("D1_single_bin", c.d1, pct(c.d1, c.b2));
    row("D1_hc_single", c.d1_hc_single, pct(c.d1_hc_single, c.b2));
    row("D1_hc_multi", c.d1 - c.d1_hc_single, pct(c.d1 - c.d1_hc_single, c.b2));
    row("D2_multi_bin", c.d2, pct(c.d2, c.b2));
    row("E1_section_stable", c.e1, pct(c.e1, c.b2));
    row("E1_hc_single", c.e1_hc_single, pct(c.e1_hc_single, c.b2));
    row("E1_hc_multi", c.e1 - c.e1_hc_single, pct(c.e1 - c.e1_hc_single, c.b2));
    row("E2_overlapping", c.e2, pct(c.e2, c.b2));
    row("E2_hc_single", c.e2_hc_single, pct(c.e2_hc_single, c.b2));
    row("E2_hc_multi", c.e2 - c.e2_hc_single, pct(c.e2 - c.e2_hc_single, c.b2));
}

}  // namespace

std::string report_to_json(const StabilityReport& report) {
    nlohmann::json j;
    j["ipv4"] = counts_to_json(report.v4);
    j["ipv6"] = counts_to_json(report.v6);
    return j.dump(2);
}

std::string report_to_csv(const StabilityReport& report) {
    std::ostringstream out;
    out << "family,category,count,percent\n";
    counts_to_csv(out, report.v4, "ipv4");
    counts_to_csv(out, report.v6, "ipv6");
    return out.str();
}

}  // namespace ttlkit
