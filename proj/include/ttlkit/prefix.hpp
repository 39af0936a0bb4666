#ifndef TTLKIT_PREFIX_HPP
#define TTLKIT_PREFIX_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ttlkit/record.hpp"

namespace ttlkit {

/// CIDR prefix: base address with low bits zeroed.
struct Cidr {
    IpKey base;
    uint8_t length = 0;

    static Cidr parse(std::string_view text);  // throws ParseError
    std::string to_string() const;
    bool contains(const IpKey& ip) const;
    uint8_t max_length() const { return base.family == Family::v4 ? 32 : 128; }

    friend bool operator==(const Cidr&, const Cidr&) = default;
    friend auto operator<=>(const Cidr&, const Cidr&) = default;
};

/// Masks an address down to `length` prefix bits.
IpKey mask_address(const IpKey& ip, uint8_t length);

/// Longest-prefix-match table mapping prefixes to values. Lookup scans
/// lengths from most to least specific; fine at desk scale.
template <typename V>
class PrefixTable {
public:
    void insert(const Cidr& prefix, V value) {
        lengths_[prefix.length][mask_address(prefix.base, prefix.length)] = std::move(value);
    }

    /// Most specific entry covering `ip`, if any.
    std::optional<std::pair<Cidr, V>> lookup(const IpKey& ip) const {
        for (auto it = lengths_.rbegin(); it != lengths_.rend(); ++it) {
            const uint8_t len = it->first;
            auto found = it->second.find(mask_address(ip, len));
            if (found != it->second.end())
                return std::make_pair(Cidr{found->first, len}, found->second);
        }
        return std::nullopt;
    }

    bool empty() const { return lengths_.empty(); }

private:
    // length -> masked base -> value, iterated longest-first
    std::map<uint8_t, std::unordered_map<IpKey, V, IpKeyHash>> lengths_;
};

}  // namespace ttlkit

#endif
