#include "ttlkit/pingback.hpp"

#include <charconv>

namespace ttlkit {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, size_t expected,
                                           size_t line_no) {
    std::vector<std::string_view> fields;
    size_t start = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    if (fields.size() != expected)
        throw ParseError("expected " + std::to_string(expected) + " columns, got " +
                             std::to_string(fields.size()),
                         line_no, "");
    return fields;
}

int64_t parse_i64(std::string_view field, const char* col, size_t line_no) {
    int64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError("malformed integer '" + std::string(field) + "'", line_no, col);
    return v;
}

}  // namespace

ProbeState ingest_probes(std::istream& targets, std::istream& replies, int offset) {
    if (offset < 0) throw std::invalid_argument("offset must be non-negative");
    ProbeState state;
    state.offset = offset;

    std::string line;
    size_t line_no = 0;
    while (std::getline(targets, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line == "run_id,ip") continue;
        auto fields = split_fields(line, 2, line_no);
        state.run_targets[std::string(fields[0])].insert(IpKey::parse(fields[1]));
    }

    line_no = 0;
    while (std::getline(replies, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line == "run_id,ts_us,ip,raw_ttl") continue;
        auto fields = split_fields(line, 4, line_no);
        std::string run_id(fields[0]);
        parse_i64(fields[1], "ts_us", line_no);  // validated, not retained
        const IpKey ip = IpKey::parse(fields[2]);
        const int64_t raw = parse_i64(fields[3], "raw_ttl", line_no);
        if (raw < 0 || raw > 255)
            throw ParseError("raw_ttl out of range", line_no, "raw_ttl");

        const int corrected = static_cast<int>(raw) + offset;
        if (corrected > 255) throw OffsetOverflow(ip, run_id, corrected);

        auto targeted = state.run_targets.find(run_id);
        if (targeted == state.run_targets.end() || !targeted->second.count(ip)) {
            state.quarantine.push_back({run_id, ip});
            continue;
        }
        ProbeRun& run = state.ips[ip].runs[run_id];
        run.corrected_ttls.insert(static_cast<uint8_t>(corrected));
        ++run.reply_count;
    }
    return state;
}

std::map<size_t, uint64_t> run_ttl_counts(const ProbeState& state) {
    std::map<size_t, uint64_t> hist;
    for (auto& [ip, st] : state.ips)
        for (auto& [run, pr] : st.runs) ++hist[pr.corrected_ttls.size()];
    return hist;
}

const char* to_string(LongitudinalClass cls) {
    switch (cls) {
        case LongitudinalClass::Stable: return "Stable";
        case LongitudinalClass::BinStable: return "BinStable";
        case LongitudinalClass::BinUnstable: return "BinUnstable";
    }
    return "?";
}

LongitudinalClass longitudinal(const ProbeState& state, const IpKey& ip) {
    auto it = state.ips.find(ip);
    if (it == state.ips.end() || it->second.runs.empty()) throw UnknownProbeIp(ip);

    std::set<uint8_t> all;
    for (auto& [run, pr] : it->second.runs) {
        if (pr.corrected_ttls.size() >= 2) return LongitudinalClass::BinUnstable;
        all.insert(pr.corrected_ttls.begin(), pr.corrected_ttls.end());
    }
    return all.size() == 1 ? LongitudinalClass::Stable : LongitudinalClass::BinStable;
}

CrossReport cross_correlate(const std::set<IpKey>& passive_multi_ttl,
                            const ProbeState& state) {
    CrossReport report;
    report.passive_multi_ttl = passive_multi_ttl.size();
    for (const IpKey& ip : passive_multi_ttl) {
        auto it = state.ips.find(ip);
        if (it == state.ips.end() || it->second.runs.empty()) {
            ++report.no_response;
            continue;
        }
        switch (longitudinal(state, ip)) {
            case LongitudinalClass::Stable: ++report.one_ttl; break;
            case LongitudinalClass::BinStable: ++report.bin_stable; break;
            case LongitudinalClass::BinUnstable: ++report.bin_unstable; break;
        }
    }
    return report;
}

std::optional<Anchor> anchor(const ProbeState& state, const IpKey& ip) {
    if (longitudinal(state, ip) != LongitudinalClass::Stable) return std::nullopt;
    const auto& runs = state.ips.at(ip).runs;
    const uint8_t ttl = *runs.begin()->second.corrected_ttls.begin();
    return Anchor{ttl, hopcount::estimate(ttl)};
}

}  // namespace ttlkit
