#include "ttlkit/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ttlkit/hopcount.hpp"

namespace ttlkit {

std::vector<AnomalyWindow> accumulation_spikes(const StateTable& table,
                                               size_t window_bins,
                                               double threshold) {
    auto [first_bin, last_bin] = table.bin_range();
    if (last_bin < first_bin || window_bins == 0) return {};

    // new IPs per bin: an IP is new in its first active bin
    std::map<BinIndex, uint64_t> new_per_bin;
    for (auto& [key, st] : table.ips())
        ++new_per_bin[st.bins.begin()->first];

    // dense prefix sums over the capture bin range
    const size_t nbins = static_cast<size_t>(last_bin - first_bin + 1);
    std::vector<uint64_t> cumulative(nbins, 0);
    uint64_t acc = 0;
    for (size_t i = 0; i < nbins; ++i) {
        auto it = new_per_bin.find(first_bin + static_cast<BinIndex>(i));
        if (it != new_per_bin.end()) acc += it->second;
        cumulative[i] = acc;
    }

    std::vector<AnomalyWindow> flagged;
    for (size_t end = 0; end < nbins; ++end) {
        const size_t start = end + 1 >= window_bins ? end + 1 - window_bins : 0;
        const uint64_t before = start == 0 ? 0 : cumulative[start - 1];
        const uint64_t in_window = cumulative[end] - before;
        // cold start: without a learned baseline every address is new and
        // the ratio is meaningless, so windows reaching back to an empty
        // table are never flagged
        if (before == 0 || cumulative[end] == 0) continue;
        const double ratio =
            static_cast<double>(in_window) / static_cast<double>(cumulative[end]);
        if (ratio < threshold) continue;

        const BinIndex wfirst = first_bin + static_cast<BinIndex>(start);
        const BinIndex wlast = first_bin + static_cast<BinIndex>(end);
        if (!flagged.empty() && wfirst <= flagged.back().last_bin + 1) {
            AnomalyWindow& prev = flagged.back();
            prev.last_bin = wlast;
            const uint64_t pstart =
                static_cast<uint64_t>(prev.first_bin - first_bin);
            const uint64_t pbefore = pstart == 0 ? 0 : cumulative[pstart - 1];
            prev.new_ip_count = cumulative[end] - pbefore;
            prev.new_ip_ratio = static_cast<double>(prev.new_ip_count) /
                                static_cast<double>(cumulative[end]);
        } else {
            flagged.push_back({wfirst, wlast, in_window, ratio});
        }
    }
    return flagged;
}

GeoTable load_geo_table(std::istream& in) {
    GeoTable table;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line == "prefix,country") continue;
        const size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError("expected prefix,country", line_no, "");
        table.insert(Cidr::parse(std::string_view(line).substr(0, comma)),
                     line.substr(comma + 1));
    }
    return table;
}

ConcentrationReport concentration(const StateTable& table, BinIndex first_bin,
                                  BinIndex last_bin, size_t top_k,
                                  const GeoTable* geo) {
    ConcentrationReport report;
    report.first_bin = first_bin;
    report.last_bin = last_bin;

    std::array<uint64_t, 256> ttl_packets{};
    std::map<uint16_t, uint64_t> port_packets;
    uint64_t single_packet_ips = 0;

    // distinct countries per TTL, when a geo table is available
    std::array<std::set<std::string>, 256> countries;

    for (auto& [key, st] : table.ips()) {
        bool in_window = false;
        std::set<uint8_t> window_ttls;
        for (auto it = st.bins.lower_bound(first_bin);
             it != st.bins.end() && it->first <= last_bin; ++it) {
            in_window = true;
            for (auto& [ttl, c] : it->second.ttl_counts) {
                ttl_packets[ttl] += c;
                report.window_packets += c;
                window_ttls.insert(ttl);
            }
        }
        if (!in_window) continue;
        ++report.window_ips;
        if (st.packet_count == 1) ++single_packet_ips;
        if (geo && !geo->empty()) {
            if (auto hit = geo->lookup(key))
                for (uint8_t ttl : window_ttls) countries[ttl].insert(hit->second);
        }
    }

    for (auto it = table.port_counts().lower_bound(first_bin);
         it != table.port_counts().end() && it->first <= last_bin; ++it)
        for (auto& [port, c] : it->second) port_packets[port] += c;

    if (report.window_ips > 0)
        report.single_packet_ip_ratio =
            static_cast<double>(single_packet_ips) / static_cast<double>(report.window_ips);

    std::vector<TtlConcentration> entries;
    for (int v = 0; v < 256; ++v) {
        if (ttl_packets[v] == 0) continue;
        TtlConcentration e;
        e.ttl = static_cast<uint8_t>(v);
        e.packets = ttl_packets[v];
        e.share = report.window_packets
                      ? static_cast<double>(e.packets) / static_cast<double>(report.window_packets)
                      : 0.0;
        if (geo && !geo->empty()) e.countries = countries[v].size();
        entries.push_back(std::move(e));
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.packets != b.packets) return a.packets > b.packets;
        return a.ttl < b.ttl;
    });
    if (entries.size() > top_k) entries.resize(top_k);
    for (auto& e : entries) report.combined_top_share += e.share;
    report.top_ttls = std::move(entries);

    uint64_t best_port_packets = 0;
    uint64_t total_port_packets = 0;
    for (auto& [port, c] : port_packets) {
        total_port_packets += c;
        if (c > best_port_packets) {
            best_port_packets = c;
            report.top_port = port;
        }
    }
    if (total_port_packets > 0)
        report.top_port_share =
            static_cast<double>(best_port_packets) / static_cast<double>(total_port_packets);
    return report;
}

FlagResult flag(const ConcentrationReport& report, const FlagPolicy& policy) {
    FlagResult result;
    const bool share_hit = report.combined_top_share >= policy.combined_share_threshold;
    const bool single_hit = report.single_packet_ip_ratio >= policy.single_packet_ratio_threshold;
    auto describe = [](const char* metric, double value, double threshold, bool hit) {
        return std::string(metric) + " " + std::to_string(value) + (hit ? " >= " : " < ") +
               std::to_string(threshold);
    };
    result.reasons.push_back(describe("combined_top_share", report.combined_top_share,
                                      policy.combined_share_threshold, share_hit));
    result.reasons.push_back(describe("single_packet_ip_ratio", report.single_packet_ip_ratio,
                                      policy.single_packet_ratio_threshold, single_hit));
    result.flagged = share_hit && single_hit;
    return result;
}

const char* to_string(VerdictKind kind) {
    switch (kind) {
        case VerdictKind::Match: return "Match";
        case VerdictKind::NearMatch: return "NearMatch";
        case VerdictKind::Mismatch: return "Mismatch";
        case VerdictKind::Unknown: return "Unknown";
    }
    return "?";
}

Verdict verdict(const StateTable& table, const PacketRecord& rec,
                const VerdictPolicy& policy) {
    Verdict v;
    v.basis = policy.basis;
    const IpState* state = table.find(rec.ip);
    if (!state) return v;  // Unknown

    const bool hc = policy.basis == VerdictBasis::hop_count;
    const int incoming = hc ? hopcount::estimate(rec.ttl).hop_count : rec.ttl;
    int best = 256;
    for (uint8_t ttl : state->distinct_ttls()) {
        const int learned = hc ? hopcount::estimate(ttl).hop_count : ttl;
        best = std::min(best, std::abs(incoming - learned));
    }
    v.distance = best;
    if (best == 0)
        v.kind = VerdictKind::Match;
    else if (static_cast<unsigned>(best) <= policy.n)
        v.kind = VerdictKind::NearMatch;
    else
        v.kind = VerdictKind::Mismatch;
    return v;
}

}  // namespace ttlkit
