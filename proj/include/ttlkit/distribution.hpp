#ifndef TTLKIT_DISTRIBUTION_HPP
#define TTLKIT_DISTRIBUTION_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "ttlkit/state.hpp"

namespace ttlkit {

enum class ValueDomain { ttl, hop_count };
enum class Counting { per_ip, per_packet };

/// Probability mass over values 0..255, per-IP or per-packet weighted.
struct EmpiricalDistribution {
    ValueDomain domain = ValueDomain::ttl;
    Counting counting = Counting::per_ip;
    std::array<double, 256> p{};

    double total() const;
    size_t support_size() const;
};

class EmptyTable : public std::runtime_error {
public:
    EmptyTable() : std::runtime_error("cannot build a distribution from an empty table") {}
};

/// per_ip: each IP contributes each distinct value once. per_packet: each
/// value weighted by its packet count. hop_count domain maps TTLs through
/// hopcount::estimate.
EmpiricalDistribution build_distribution(const StateTable& table, ValueDomain domain,
                                         Counting counting, Family family);
/// Both families pooled.
EmpiricalDistribution build_distribution(const StateTable& table, ValueDomain domain,
                                         Counting counting);

/// P(two draws are equal or differ by exactly n). n = 0 reduces to sum p^2.
double collision_exact(const EmpiricalDistribution& d, unsigned n);

/// P(two draws differ by at most n); 1.0 exactly once the window spans the
/// whole domain.
double collision_window(const EmpiricalDistribution& d, unsigned n);

struct FlowCollision {
    double probability;
    bool saturated;  // n > ports: collision certain by pigeonhole
};

/// Birthday-problem collision risk for n concurrent users drawing distinct
/// ephemeral ports. Evaluated in log space.
FlowCollision flow_collision(uint64_t n, uint64_t ports = 65000);

struct ValueShare {
    uint16_t value;
    double share;
};

/// Top-k values by share, descending; ties broken by ascending value.
std::vector<ValueShare> top_k(const EmpiricalDistribution& d, size_t k);

}  // namespace ttlkit

#endif
