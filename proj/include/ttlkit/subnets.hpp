#ifndef TTLKIT_SUBNETS_HPP
#define TTLKIT_SUBNETS_HPP

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <vector>

#include "ttlkit/prefix.hpp"

namespace ttlkit {

using HostHops = std::map<IpKey, int>;  // ip -> estimated hop count

struct SubnetStats {
    Cidr prefix;
    uint64_t host_count = 0;
    double hc_stddev = 0.0;           // population standard deviation
    int hc_amplitude = 0;             // max - min
    double median_pm1_coverage = 0.0; // hosts within lower-median +/- 1
};

/// Groups hosts into equisized subnets of `prefix_len` bits. Single-host
/// subnets are trivially stable and retained. Median is the lower median
/// for even counts.
std::vector<SubnetStats> subnet_stats(const HostHops& hosts, uint8_t prefix_len);

struct PrefixRecord {
    Cidr prefix;
    int as_path_length = 0;
};

/// Flattened RIB snapshot CSV: `prefix,as_path_len`, one path length per
/// prefix; overlapping prefixes allowed.
std::vector<PrefixRecord> load_rib(std::istream& in);

using RibIndex = PrefixTable<int>;  // prefix -> AS path length
RibIndex index_rib(const std::vector<PrefixRecord>& rib);

/// Longest-prefix match; nullopt for uncovered addresses.
std::optional<PrefixRecord> assign_prefix(const IpKey& ip, const RibIndex& rib);

/// Mean estimated hop count over the hosts covered by each announced
/// prefix; prefixes with no hosts are omitted.
std::map<Cidr, double> mean_hc_per_prefix(const HostHops& hosts, const RibIndex& rib);

class DegenerateRegression : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RegressionResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double p_value = 1.0;   // two-sided t-test on the slope against zero
    double slope_stderr = 0.0;
    size_t sample_count = 0;

    /// Half-width of the 95% confidence interval around the slope.
    double slope_ci95_halfwidth() const;
};

/// Ordinary least squares over (as_path_length, mean_hc) points. Requires
/// >= 3 points with at least 2 distinct x values.
RegressionResult regress(const std::vector<std::pair<double, double>>& points);

}  // namespace ttlkit

#endif
