#ifndef TTLKIT_STATE_HPP
#define TTLKIT_STATE_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "ttlkit/record.hpp"

namespace ttlkit {

using BinIndex = int64_t;

inline constexpr int64_t kDefaultBinWidthUs = 600LL * 1000 * 1000;  // 10 minutes

class RecordBeforeEpoch : public std::runtime_error {
public:
    explicit RecordBeforeEpoch(int64_t ts, int64_t epoch)
        : std::runtime_error("record timestamp " + std::to_string(ts) +
                             " precedes epoch " + std::to_string(epoch)) {}
};

class ConfigMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-(IP,bin) aggregate. Per-TTL counts are required for exact excision
/// and mixbin logic; the timestamp span recovers first/last_seen after
/// bins are removed.
struct BinState {
    std::map<uint8_t, uint64_t> ttl_counts;  // TTL -> packet count in this bin
    int64_t min_ts = 0;
    int64_t max_ts = 0;

    uint64_t packet_count() const;
    bool is_mixbin() const { return ttl_counts.size() >= 2; }

    friend bool operator==(const BinState&, const BinState&) = default;
};

struct IpState {
    uint64_t packet_count = 0;
    int64_t first_seen = 0;
    int64_t last_seen = 0;
    std::map<BinIndex, BinState> bins;

    /// Aggregate TTL histogram over all bins.
    std::map<uint8_t, uint64_t> ttl_histogram() const;
    std::set<uint8_t> distinct_ttls() const;

    /// last_seen - first_seen; 0 for single-packet IPs.
    int64_t observation_duration_us() const { return last_seen - first_seen; }
    size_t active_bin_count() const { return bins.size(); }

    friend bool operator==(const IpState&, const IpState&) = default;
};

/// Per-IP binned aggregates plus capture-wide per-bin internal-port counts
/// (the concentration analysis needs the destination-port mix per window).
class StateTable {
public:
    StateTable() = default;
    StateTable(int64_t epoch_us, int64_t bin_width_us);

    /// Auto-epoch table with a non-default bin width.
    static StateTable auto_epoch(int64_t bin_width_us);

    /// With an explicit epoch, bin = floor((ts - epoch) / width) and records
    /// before the epoch are rejected. Without one, bins live on the absolute
    /// grid floor(ts / width) so indices are stable under record reordering
    /// and sharding; epoch_us() then reports the earliest bin start.
    void ingest(const PacketRecord& rec);

    /// Pointwise sum; both tables must share epoch and bin width. Merging
    /// into a default-constructed (never-ingested) table adopts the other
    /// table's configuration.
    void merge(const StateTable& other);

    /// Recomputes state as if records in `bins` never existed. IPs left
    /// with zero packets disappear.
    StateTable excise_bins(const std::set<BinIndex>& bins) const;

    BinIndex bin_of(int64_t ts_us) const;

    const std::unordered_map<IpKey, IpState, IpKeyHash>& ips() const { return ips_; }
    const IpState* find(const IpKey& key) const;

    int64_t epoch_us() const { return epoch_us_; }
    int64_t bin_width_us() const { return bin_width_us_; }
    uint64_t record_count() const { return record_count_; }
    bool configured() const { return configured_; }

    /// Range of bins touched by any record, inclusive. {0,-1} when empty.
    std::pair<BinIndex, BinIndex> bin_range() const;

    const std::map<BinIndex, std::map<uint16_t, uint64_t>>& port_counts() const {
        return port_counts_;
    }

    /// NDJSON snapshot: a metadata line, then one object per IP.
    void write_snapshot(std::ostream& out) const;
    static StateTable read_snapshot(std::istream& in);

    friend bool operator==(const StateTable& a, const StateTable& b);

private:
    void configure_from(int64_t first_ts);

    std::unordered_map<IpKey, IpState, IpKeyHash> ips_;
    std::map<BinIndex, std::map<uint16_t, uint64_t>> port_counts_;
    int64_t epoch_us_ = 0;
    int64_t bin_width_us_ = kDefaultBinWidthUs;
    uint64_t record_count_ = 0;
    bool configured_ = false;
    bool epoch_fixed_ = false;  // explicit epoch given at construction
};

}  // namespace ttlkit

#endif
