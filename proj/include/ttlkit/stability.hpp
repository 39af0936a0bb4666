#ifndef TTLKIT_STABILITY_HPP
#define TTLKIT_STABILITY_HPP

#include <cstdint>
#include <string>

#include "ttlkit/state.hpp"

namespace ttlkit {

/// Leaves of the per-IP TTL stability decision tree:
///   B1 single packet; C1 one distinct TTL; D1 multiple TTLs in one active
///   bin; E1 multi-bin with no adjacent mixbins (section-stable); E2
///   multi-bin with adjacent mixbins (overlapping TTLs).
enum class StabilityLeaf : uint8_t {
    B1_SinglePacket,
    C1_SingleTTL,
    D1_MultiTTL_SingleBin,
    E1_SectionStable,
    E2_Overlapping,
};

const char* to_string(StabilityLeaf leaf);

struct StabilityClass {
    StabilityLeaf leaf;
    bool hc_single;  // exactly one distinct estimated Hop Count

    friend bool operator==(const StabilityClass&, const StabilityClass&) = default;
};

/// Mixbin adjacency interpretation: activity order treats the IP's active
/// bins as a sequence regardless of gaps; wall-clock requires bin indices
/// to be numerically consecutive.
enum class MixbinAdjacency { activity_order, wall_clock };

/// True iff no two adjacent bins are both mixbins. A single isolated
/// mixbin is allowed as a transition between TTLs.
bool section_stable(const IpState& state,
                    MixbinAdjacency adjacency = MixbinAdjacency::activity_order);

StabilityClass classify(const IpState& state,
                        MixbinAdjacency adjacency = MixbinAdjacency::activity_order);

/// max - min of observed TTLs; 0 iff one distinct TTL.
int ttl_amplitude(const IpState& state);

/// max - min of estimated Hop Counts over distinct observed TTLs.
int hc_amplitude(const IpState& state);

/// Decision-tree population counts for one address family. Sums reconcile:
/// B1 + B2 = total; C1 + C2 = B2; D1 + D2 = C2; E1 + E2 = D2.
struct LeafCounts {
    uint64_t total = 0;         // A
    uint64_t b1 = 0;            // single-packet IPs
    uint64_t b2 = 0;            // multi-packet IPs
    uint64_t c1 = 0;            // one TTL
    uint64_t c2 = 0;            // >1 TTL
    uint64_t d1 = 0;            // one active bin
    uint64_t d1_hc_single = 0;
    uint64_t d2 = 0;            // >1 active bin
    uint64_t e1 = 0;            // section-stable
    uint64_t e1_hc_single = 0;
    uint64_t e2 = 0;            // overlapping
    uint64_t e2_hc_single = 0;

    friend bool operator==(const LeafCounts&, const LeafCounts&) = default;
};

struct StabilityReport {
    LeafCounts v4;
    LeafCounts v6;
};

StabilityReport summarize(const StateTable& table,
                          MixbinAdjacency adjacency = MixbinAdjacency::activity_order);

/// Percentage helper matching the report's bases: B-level shares are
/// against all IPs, C/D/E-level shares against multi-packet IPs.
double pct(uint64_t part, uint64_t base);

std::string report_to_json(const StabilityReport& report);
std::string report_to_csv(const StabilityReport& report);

}  // namespace ttlkit

#endif
