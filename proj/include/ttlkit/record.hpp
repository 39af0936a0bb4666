#ifndef TTLKIT_RECORD_HPP
#define TTLKIT_RECORD_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ttlkit {

enum class Family : uint8_t { v4, v6 };

/// Canonical address key. v4 keeps 4 bytes, v6 keeps 16; text form is
/// dotted-quad respectively RFC 5952 lowercase compressed.
struct IpKey {
    Family family = Family::v4;
    std::array<uint8_t, 16> bytes{};  // v4 uses bytes[0..3], rest zero

    static IpKey parse(std::string_view text);  // throws ParseError
    static std::optional<IpKey> try_parse(std::string_view text);

    std::string to_string() const;
    size_t byte_count() const { return family == Family::v4 ? 4 : 16; }

    friend bool operator==(const IpKey&, const IpKey&) = default;
    friend auto operator<=>(const IpKey&, const IpKey&) = default;
};

struct IpKeyHash {
    size_t operator()(const IpKey& k) const {
        std::string_view sv(reinterpret_cast<const char*>(k.bytes.data()), 16);
        return std::hash<std::string_view>{}(sv) ^ (static_cast<size_t>(k.family) << 1);
    }
};

/// One passive observation. No payload, no internal address.
struct PacketRecord {
    int64_t ts_us = 0;      // microseconds since Unix epoch
    IpKey ip;               // external address
    uint8_t proto = 0;      // IANA protocol number
    uint16_t ext_port = 0;  // 0 when the protocol has no ports
    uint16_t int_port = 0;
    uint8_t ttl = 0;

    friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

/// 4-flow key: external IP + protocol + both ports, internal IP absent.
struct FourFlow {
    IpKey ip;
    uint8_t proto = 0;
    uint16_t ext_port = 0;
    uint16_t int_port = 0;

    friend bool operator==(const FourFlow&, const FourFlow&) = default;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::string msg, size_t line, std::string column)
        : std::runtime_error(format(msg, line, column)),
          line_(line), column_(std::move(column)) {}
    size_t line() const { return line_; }
    const std::string& column() const { return column_; }

private:
    static std::string format(const std::string& msg, size_t line, const std::string& col);
    size_t line_;
    std::string column_;
};

/// Parses one CSV row of `ts_us,ip,proto,ext_port,int_port,ttl`.
/// `line_no` only feeds error messages.
PacketRecord parse_record(std::string_view line, size_t line_no = 0);

/// Canonical serialization, round-trips through parse_record.
std::string serialize_record(const PacketRecord& rec);

inline constexpr std::string_view kRecordCsvHeader = "ts_us,ip,proto,ext_port,int_port,ttl";

enum class ReadPolicy { strict, skip_and_count };

/// Streaming reader over the record CSV format. Bounded memory: holds one
/// line at a time. An optional header row is skipped automatically.
class RecordReader {
public:
    explicit RecordReader(std::istream& in, ReadPolicy policy = ReadPolicy::strict)
        : in_(in), policy_(policy) {}

    /// Next record, or nullopt at end of stream. Throws ParseError on bad
    /// rows under the strict policy; counts and skips them otherwise.
    std::optional<PacketRecord> next();

    size_t skipped() const { return skipped_; }
    size_t line_no() const { return line_no_; }

private:
    std::istream& in_;
    ReadPolicy policy_;
    size_t line_no_ = 0;
    size_t skipped_ = 0;
    bool first_line_ = true;
    std::string buf_;
};

}  // namespace ttlkit

#endif
