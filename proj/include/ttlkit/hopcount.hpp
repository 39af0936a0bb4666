#ifndef TTLKIT_HOPCOUNT_HPP
#define TTLKIT_HOPCOUNT_HPP

#include <cstdint>

namespace ttlkit::hopcount {

/// TTL mapped back to an assumed start value. The start value is the
/// smallest of {32, 64, 128, 255} that is >= ttl; hop_count = start - ttl.
/// Estimates with more than 32 hops are kept but flagged unreliable.
struct HopEstimate {
    uint8_t start;
    uint8_t hop_count;
    bool reliable;

    friend bool operator==(const HopEstimate&, const HopEstimate&) = default;
};

inline constexpr uint8_t kStartValues[4] = {32, 64, 128, 255};
inline constexpr uint8_t kReliableMaxHops = 32;

constexpr HopEstimate estimate(uint8_t ttl) {
    uint8_t start = 255;
    for (uint8_t s : kStartValues) {
        if (s >= ttl) { start = s; break; }
    }
    const uint8_t hc = static_cast<uint8_t>(start - ttl);
    return {start, hc, hc <= kReliableMaxHops};
}

}  // namespace ttlkit::hopcount

#endif
