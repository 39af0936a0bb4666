#ifndef TTLKIT_PINGBACK_HPP
#define TTLKIT_PINGBACK_HPP

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ttlkit/hopcount.hpp"
#include "ttlkit/record.hpp"

namespace ttlkit {

class OffsetOverflow : public std::runtime_error {
public:
    OffsetOverflow(const IpKey& ip, const std::string& run, int corrected)
        : std::runtime_error("corrected TTL " + std::to_string(corrected) +
                             " exceeds 255 for " + ip.to_string() + " in run " + run) {}
};

class UnknownProbeIp : public std::runtime_error {
public:
    explicit UnknownProbeIp(const IpKey& ip)
        : std::runtime_error("no probe replies recorded for " + ip.to_string()) {}
};

struct ProbeRun {
    std::set<uint8_t> corrected_ttls;
    uint64_t reply_count = 0;  // may exceed the request count; kept as-is
};

struct ProbeIpState {
    std::map<std::string, ProbeRun> runs;  // run_id -> replies in that run
};

struct QuarantinedReply {
    std::string run_id;
    IpKey ip;
};

/// Active-measurement results: per-IP per-run corrected reply TTLs, plus
/// the target registry per run.
struct ProbeState {
    std::unordered_map<IpKey, ProbeIpState, IpKeyHash> ips;
    std::map<std::string, std::set<IpKey>> run_targets;
    std::vector<QuarantinedReply> quarantine;  // replies for untargeted IPs
    int offset = 0;
};

/// targets CSV: `run_id,ip`; replies CSV: `run_id,ts_us,ip,raw_ttl`.
/// Every raw TTL gets `offset` added; a corrected value above 255 is a
/// hard error rather than silent saturation.
ProbeState ingest_probes(std::istream& targets, std::istream& replies, int offset = 3);

/// Distinct-corrected-TTLs-per-(IP,run) histogram. IPs probed in several
/// runs contribute one cell per run.
std::map<size_t, uint64_t> run_ttl_counts(const ProbeState& state);

enum class LongitudinalClass : uint8_t { Stable, BinStable, BinUnstable };

const char* to_string(LongitudinalClass cls);

/// Stable: one TTL across all runs. BinStable: each run single-TTL but the
/// TTL changes across runs. BinUnstable: some run saw >= 2 TTLs.
LongitudinalClass longitudinal(const ProbeState& state, const IpKey& ip);

struct CrossReport {
    uint64_t passive_multi_ttl = 0;  // base population
    uint64_t one_ttl = 0;            // pingback Stable
    uint64_t bin_stable = 0;
    uint64_t bin_unstable = 0;
    uint64_t no_response = 0;
};

/// Partitions passively observed multi-TTL IPs by their probe behavior.
CrossReport cross_correlate(const std::set<IpKey>& passive_multi_ttl,
                            const ProbeState& state);

struct Anchor {
    uint8_t ttl;
    hopcount::HopEstimate hop;
};

/// Single trusted value for an IP, defined iff its longitudinal class is
/// Stable.
std::optional<Anchor> anchor(const ProbeState& state, const IpKey& ip);

}  // namespace ttlkit

#endif
