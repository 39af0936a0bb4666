#include "ttlkit/record.hpp"

#include <arpa/inet.h>

#include <charconv>
#include <cstring>

namespace ttlkit {

std::string ParseError::format(const std::string& msg, size_t line, const std::string& col) {
    std::string out = msg;
    if (!col.empty()) out += " (column " + col + ")";
    if (line != 0) out += " at line " + std::to_string(line);
    return out;
}

std::optional<IpKey> IpKey::try_parse(std::string_view text) {
    if (text.empty() || text.size() > 45) return std::nullopt;
    char buf[46];
    std::memcpy(buf, text.data(), text.size());
    buf[text.size()] = '\0';

    IpKey key{};
    if (text.find(':') != std::string_view::npos) {
        key.family = Family::v6;
        if (inet_pton(AF_INET6, buf, key.bytes.data()) != 1) return std::nullopt;
    } else {
        key.family = Family::v4;
        if (inet_pton(AF_INET, buf, key.bytes.data()) != 1) return std::nullopt;
    }
    return key;
}

IpKey IpKey::parse(std::string_view text) {
    auto key = try_parse(text);
    if (!key) throw ParseError("unparseable address '" + std::string(text) + "'", 0, "ip");
    return *key;
}

std::string IpKey::to_string() const {
    char buf[INET6_ADDRSTRLEN];
    const int af = family == Family::v4 ? AF_INET : AF_INET6;
    if (!inet_ntop(af, bytes.data(), buf, sizeof(buf)))
        throw std::runtime_error("inet_ntop failed");
    return buf;  // inet_ntop emits RFC 5952 lowercase compressed for v6
}

namespace {

template <typename T>
T parse_int(std::string_view field, int64_t lo, int64_t hi,
            const char* col, size_t line_no) {
    int64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError("malformed integer '" + std::string(field) + "'", line_no, col);
    if (value < lo || value > hi)
        throw ParseError("value " + std::to_string(value) + " out of range [" +
                             std::to_string(lo) + "," + std::to_string(hi) + "]",
                         line_no, col);
    return static_cast<T>(value);
}

}  // namespace

PacketRecord parse_record(std::string_view line, size_t line_no) {
    std::array<std::string_view, 6> fields;
    size_t start = 0, n = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            if (n >= 6) throw ParseError("too many columns", line_no, "");
            fields[n++] = line.substr(start, i - start);
            start = i + 1;
        }
    }
    if (n != 6) throw ParseError("expected 6 columns, got " + std::to_string(n), line_no, "");

    PacketRecord rec;
    rec.ts_us = parse_int<int64_t>(fields[0], 0, INT64_MAX, "ts_us", line_no);
    auto ip = IpKey::try_parse(fields[1]);
    if (!ip)
        throw ParseError("unparseable address '" + std::string(fields[1]) + "'", line_no, "ip");
    rec.ip = *ip;
    rec.proto = parse_int<uint8_t>(fields[2], 0, 255, "proto", line_no);
    rec.ext_port = parse_int<uint16_t>(fields[3], 0, 65535, "ext_port", line_no);
    rec.int_port = parse_int<uint16_t>(fields[4], 0, 65535, "int_port", line_no);
    rec.ttl = parse_int<uint8_t>(fields[5], 0, 255, "ttl", line_no);
    return rec;
}

std::string serialize_record(const PacketRecord& rec) {
    std::string out = std::to_string(rec.ts_us);
    out += ',';
    out += rec.ip.to_string();
    out += ',';
    out += std::to_string(rec.proto);
    out += ',';
    out += std::to_string(rec.ext_port);
    out += ',';
    out += std::to_string(rec.int_port);
    out += ',';
    out += std::to_string(rec.ttl);
    return out;
}

std::optional<PacketRecord> RecordReader::next() {
    while (std::getline(in_, buf_)) {
        ++line_no_;
        if (!buf_.empty() && buf_.back() == '\r') buf_.pop_back();
        if (first_line_) {
            first_line_ = false;
            if (buf_ == kRecordCsvHeader) continue;
        }
        if (buf_.empty()) continue;
        try {
            return parse_record(buf_, line_no_);
        } catch (const ParseError&) {
            if (policy_ == ReadPolicy::strict) throw;
            ++skipped_;
        }
    }
    return std::nullopt;
}

}  // namespace ttlkit
