#include "ttlkit/prefix.hpp"

#include <charconv>

namespace ttlkit {

IpKey mask_address(const IpKey& ip, uint8_t length) {
    IpKey out = ip;
    const size_t nbytes = ip.byte_count();
    for (size_t i = 0; i < nbytes; ++i) {
        const size_t bit = i * 8;
        if (bit + 8 <= length) continue;
        if (bit >= length) {
            out.bytes[i] = 0;
        } else {
            const uint8_t keep = static_cast<uint8_t>(length - bit);
            out.bytes[i] &= static_cast<uint8_t>(0xFF << (8 - keep));
        }
    }
    return out;
}

Cidr Cidr::parse(std::string_view text) {
    const size_t slash = text.rfind('/');
    if (slash == std::string_view::npos)
        throw ParseError("prefix '" + std::string(text) + "' missing /length", 0, "prefix");
    const IpKey base = IpKey::parse(text.substr(0, slash));
    const std::string_view len_text = text.substr(slash + 1);
    unsigned len = 0;
    auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
    if (ec != std::errc{} || ptr != len_text.data() + len_text.size())
        throw ParseError("bad prefix length '" + std::string(len_text) + "'", 0, "prefix");
    Cidr cidr{base, static_cast<uint8_t>(len)};
    if (len > cidr.max_length())
        throw ParseError("prefix length " + std::to_string(len) + " exceeds family maximum",
                         0, "prefix");
    cidr.base = mask_address(base, cidr.length);
    return cidr;
}

std::string Cidr::to_string() const {
    return base.to_string() + "/" + std::to_string(length);
}

bool Cidr::contains(const IpKey& ip) const {
    if (ip.family != base.family) return false;
    return mask_address(ip, length) == base;
}

}  // namespace ttlkit
