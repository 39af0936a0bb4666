#include "ttlkit/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "ttlkit/hopcount.hpp"
#include "ttlkit/kernels.hpp"

namespace ttlkit {

double EmpiricalDistribution::total() const {
    double t = 0.0;
    for (double v : p) t += v;
    return t;
}

size_t EmpiricalDistribution::support_size() const {
    size_t n = 0;
    for (double v : p) n += v > 0.0;
    return n;
}

namespace {

uint8_t domain_value(ValueDomain domain, uint8_t ttl) {
    return domain == ValueDomain::ttl ? ttl : hopcount::estimate(ttl).hop_count;
}

EmpiricalDistribution build_impl(const StateTable& table, ValueDomain domain,
                                 Counting counting, std::optional<Family> family) {
    EmpiricalDistribution d;
    d.domain = domain;
    d.counting = counting;

    std::array<uint64_t, 256> counts{};
    uint64_t total = 0;
    for (auto& [key, st] : table.ips()) {
        if (family && key.family != *family) continue;
        if (counting == Counting::per_ip) {
            std::set<uint8_t> values;
            for (uint8_t ttl : st.distinct_ttls()) values.insert(domain_value(domain, ttl));
            for (uint8_t v : values) {
                ++counts[v];
                ++total;
            }
        } else {
            for (auto& [ttl, c] : st.ttl_histogram()) {
                counts[domain_value(domain, ttl)] += c;
                total += c;
            }
        }
    }
    if (total == 0) throw EmptyTable();
    for (int v = 0; v < 256; ++v)
        d.p[v] = static_cast<double>(counts[v]) / static_cast<double>(total);
    return d;
}

}  // namespace

EmpiricalDistribution build_distribution(const StateTable& table, ValueDomain domain,
                                         Counting counting, Family family) {
    return build_impl(table, domain, counting, family);
}

EmpiricalDistribution build_distribution(const StateTable& table, ValueDomain domain,
                                         Counting counting) {
    return build_impl(table, domain, counting, std::nullopt);
}

double collision_exact(const EmpiricalDistribution& d, unsigned n) {
    const double same = kernels::sum_squares(d.p);
    if (n == 0) return same;  // the +/- terms would triple-count the same-value mass
    return same + 2.0 * kernels::shifted_dot(d.p, n);
}

double collision_window(const EmpiricalDistribution& d, unsigned n) {
    if (n >= d.p.size() - 1) return 1.0;  // window covers the whole domain
    double acc = kernels::sum_squares(d.p);
    for (unsigned k = 1; k <= n; ++k) acc += 2.0 * kernels::shifted_dot(d.p, k);
    return acc;
}

FlowCollision flow_collision(uint64_t n, uint64_t ports) {
    if (n == 0 || n == 1) return {0.0, false};
    if (n > ports) return {1.0, true};
    double log_no_collision = 0.0;
    for (uint64_t i = 1; i < n; ++i)
        log_no_collision += std::log1p(-static_cast<double>(i) / static_cast<double>(ports));
    return {-std::expm1(log_no_collision), false};
}

std::vector<ValueShare> top_k(const EmpiricalDistribution& d, size_t k) {
    std::vector<ValueShare> entries;
    for (int v = 0; v < 256; ++v)
        if (d.p[v] > 0.0) entries.push_back({static_cast<uint16_t>(v), d.p[v]});
    std::sort(entries.begin(), entries.end(), [](const ValueShare& a, const ValueShare& b) {
        if (a.share != b.share) return a.share > b.share;
        return a.value < b.value;
    });
    if (entries.size() > k) entries.resize(k);
    return entries;
}

}  // namespace ttlkit
