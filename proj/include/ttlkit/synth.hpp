#ifndef TTLKIT_SYNTH_HPP
#define TTLKIT_SYNTH_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ttlkit/pingback.hpp"
#include "ttlkit/record.hpp"
#include "ttlkit/stability.hpp"
#include "ttlkit/state.hpp"

namespace ttlkit::synth {

/// Host population kinds, each constructed so the stability leaf is known
/// in advance:
///   single_packet        -> B1
///   stable               -> C1 (one TTL, any number of bins)
///   single_bin_multi_ttl -> D1 (several TTLs, one active bin)
///   reassignment         -> E1 (start-value switch with one transition mixbin)
///   routing_churn        -> E1 (hop-count shift at a clean bin boundary)
///   nat_overlap          -> E2 (two TTLs concurrently active in adjacent bins)
enum class GroupKind {
    single_packet,
    stable,
    single_bin_multi_ttl,
    reassignment,
    routing_churn,
    nat_overlap,
};

enum class ProbeBehavior { stable, bin_stable, bin_unstable, unresponsive };

struct HostGroup {
    GroupKind kind = GroupKind::stable;
    Family family = Family::v4;
    uint32_t count = 1;
    uint8_t start = 64;        // TTL start value
    uint8_t hop_count = 14;
    uint8_t second_start = 128;   // reassignment / single_bin_multi_ttl
    int8_t churn_delta = 1;       // routing_churn hop-count shift
    uint32_t packets_per_host = 10;
    ProbeBehavior probe = ProbeBehavior::stable;
    uint32_t replies_per_run = 1;  // >1 models NAT pools answering in bulk
};

struct AttackSpec {
    int64_t start_s = 0;
    int64_t end_s = 0;
    uint64_t packet_rate = 0;      // packets per second
    uint32_t source_count = 0;     // spoofed single-packet sources
    std::vector<uint8_t> ttls;     // attacker TTL set
    uint16_t dest_port = 80;
};

struct ScenarioSpec {
    uint64_t seed = 1;
    int64_t duration_s = 7200;
    int64_t bin_width_s = 600;
    int64_t start_ts_us = 0;
    uint32_t probe_runs = 3;
    int probe_offset = 3;
    std::vector<HostGroup> groups;
    std::optional<AttackSpec> attack;

    static ScenarioSpec from_json(const std::string& text);
    std::string to_json() const;
};

class InfeasibleSpec : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct IpTruth {
    StabilityLeaf leaf = StabilityLeaf::C1_SingleTTL;
    std::optional<LongitudinalClass> probe_class;  // nullopt: unresponsive
    bool spoofed = false;
};

struct GroundTruth {
    std::unordered_map<IpKey, IpTruth, IpKeyHash> ips;
    // half-open record index ranges into the generated stream
    std::pair<size_t, size_t> genuine_records{0, 0};
    std::pair<size_t, size_t> spoofed_records{0, 0};
    std::optional<std::pair<BinIndex, BinIndex>> attack_bins;  // inclusive
};

struct Scenario {
    std::vector<PacketRecord> records;
    GroundTruth truth;
};

/// Deterministic for a given seed: same spec + seed, byte-identical output.
Scenario generate(const ScenarioSpec& spec);

struct ProbeReply {
    std::string run_id;
    int64_t ts_us;
    IpKey ip;
    uint8_t raw_ttl;
};

/// Simulated probe replies for one host, consistent with its group's
/// declared behavior. Empty for unresponsive hosts and unknown IPs are an
/// error.
std::vector<ProbeReply> probe_behavior(const ScenarioSpec& spec, const IpKey& ip);

/// Writes the record CSV, probe targets/replies CSVs and the ground-truth
/// NDJSON in the same formats the ingestion modules consume.
void write_records_csv(std::ostream& out, const std::vector<PacketRecord>& records);
void write_probe_files(const ScenarioSpec& spec, std::ostream& targets,
                       std::ostream& replies);
void write_ground_truth(std::ostream& out, const GroundTruth& truth);

}  // namespace ttlkit::synth

#endif
