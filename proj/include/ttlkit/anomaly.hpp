#ifndef TTLKIT_ANOMALY_HPP
#define TTLKIT_ANOMALY_HPP

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "ttlkit/prefix.hpp"
#include "ttlkit/state.hpp"

namespace ttlkit {

/// Contiguous bin range where address accumulation spiked.
struct AnomalyWindow {
    BinIndex first_bin = 0;
    BinIndex last_bin = 0;  // inclusive
    uint64_t new_ip_count = 0;
    double new_ip_ratio = 0.0;  // new IPs / cumulative learned IPs at window end
};

/// Slides a `window_bins`-wide window over the capture's bin range. An IP
/// counts as new in its first active bin; a window is flagged when new IPs
/// divided by cumulative learned IPs at window end reach `threshold`.
/// Windows with no learned baseline before them (cold start) are skipped.
/// Overlapping flagged windows are coalesced into maximal ranges.
std::vector<AnomalyWindow> accumulation_spikes(const StateTable& table,
                                               size_t window_bins,
                                               double threshold);

/// IP -> country lookup from a prefix CSV (`prefix,country`), longest match.
using GeoTable = PrefixTable<std::string>;
GeoTable load_geo_table(std::istream& in);

struct TtlConcentration {
    uint8_t ttl = 0;
    uint64_t packets = 0;
    double share = 0.0;
    // distinct source countries, only when a geo table was supplied
    std::optional<size_t> countries;
};

struct ConcentrationReport {
    BinIndex first_bin = 0;
    BinIndex last_bin = 0;
    uint64_t window_packets = 0;
    uint64_t window_ips = 0;
    std::vector<TtlConcentration> top_ttls;
    double combined_top_share = 0.0;
    double single_packet_ip_ratio = 0.0;  // window IPs whose total count is 1
    uint16_t top_port = 0;
    double top_port_share = 0.0;
};

ConcentrationReport concentration(const StateTable& table, BinIndex first_bin,
                                  BinIndex last_bin, size_t top_k = 5,
                                  const GeoTable* geo = nullptr);

struct FlagPolicy {
    double combined_share_threshold = 0.99;
    double single_packet_ratio_threshold = 0.95;
};

struct FlagResult {
    bool flagged = false;
    std::vector<std::string> reasons;  // satisfied/violated thresholds, spelled out
};

/// Thresholds use >= semantics: a report exactly at a threshold is flagged.
FlagResult flag(const ConcentrationReport& report, const FlagPolicy& policy = {});

enum class VerdictKind : uint8_t { Match, NearMatch, Mismatch, Unknown };

const char* to_string(VerdictKind kind);

enum class VerdictBasis : uint8_t { ttl, hop_count };

struct Verdict {
    VerdictKind kind = VerdictKind::Unknown;
    VerdictBasis basis = VerdictBasis::ttl;
    int distance = -1;  // value distance to the closest learned value; -1 for Unknown
};

struct VerdictPolicy {
    VerdictBasis basis = VerdictBasis::ttl;
    unsigned n = 0;  // NearMatch acceptance window
};

Verdict verdict(const StateTable& table, const PacketRecord& rec,
                const VerdictPolicy& policy);

}  // namespace ttlkit

#endif
