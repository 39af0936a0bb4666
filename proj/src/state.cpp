#include "ttlkit/state.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace ttlkit {

uint64_t BinState::packet_count() const {
    uint64_t n = 0;
    for (auto& [ttl, c] : ttl_counts) n += c;
    return n;
}

std::map<uint8_t, uint64_t> IpState::ttl_histogram() const {
    std::map<uint8_t, uint64_t> hist;
    for (auto& [bin, bs] : bins)
        for (auto& [ttl, c] : bs.ttl_counts) hist[ttl] += c;
    return hist;
}

std::set<uint8_t> IpState::distinct_ttls() const {
    std::set<uint8_t> out;
    for (auto& [bin, bs] : bins)
        for (auto& [ttl, c] : bs.ttl_counts) out.insert(ttl);
    return out;
}

StateTable::StateTable(int64_t epoch_us, int64_t bin_width_us)
    : epoch_us_(epoch_us), bin_width_us_(bin_width_us),
      configured_(true), epoch_fixed_(true) {
    if (bin_width_us <= 0) throw ConfigMismatch("bin width must be positive");
}

StateTable StateTable::auto_epoch(int64_t bin_width_us) {
    if (bin_width_us <= 0) throw ConfigMismatch("bin width must be positive");
    StateTable t;
    t.bin_width_us_ = bin_width_us;
    return t;
}

BinIndex StateTable::bin_of(int64_t ts_us) const {
    const int64_t origin = epoch_fixed_ ? epoch_us_ : 0;
    const int64_t rel = ts_us - origin;
    // rel >= 0 is checked on ingest; floor division
    return rel >= 0 ? rel / bin_width_us_
                    : -((-rel + bin_width_us_ - 1) / bin_width_us_);
}

void StateTable::configure_from(int64_t first_ts) {
    if (!configured_) {
        epoch_us_ = (first_ts / bin_width_us_) * bin_width_us_;
        configured_ = true;
    } else if (!epoch_fixed_) {
        epoch_us_ = std::min(epoch_us_, (first_ts / bin_width_us_) * bin_width_us_);
    }
}

void StateTable::ingest(const PacketRecord& rec) {
    if (epoch_fixed_ && rec.ts_us < epoch_us_)
        throw RecordBeforeEpoch(rec.ts_us, epoch_us_);
    configure_from(rec.ts_us);

    const BinIndex bin = bin_of(rec.ts_us);
    IpState& st = ips_[rec.ip];
    if (st.packet_count == 0) {
        st.first_seen = rec.ts_us;
        st.last_seen = rec.ts_us;
    } else {
        st.first_seen = std::min(st.first_seen, rec.ts_us);
        st.last_seen = std::max(st.last_seen, rec.ts_us);
    }
    ++st.packet_count;

    auto [it, inserted] = st.bins.try_emplace(bin);
    BinState& bs = it->second;
    if (inserted) {
        bs.min_ts = rec.ts_us;
        bs.max_ts = rec.ts_us;
    } else {
        bs.min_ts = std::min(bs.min_ts, rec.ts_us);
        bs.max_ts = std::max(bs.max_ts, rec.ts_us);
    }
    ++bs.ttl_counts[rec.ttl];

    ++port_counts_[bin][rec.int_port];
    ++record_count_;
}

void StateTable::merge(const StateTable& other) {
    if (!other.configured_) return;
    if (!configured_ && !epoch_fixed_) {
        *this = other;
        return;
    }
    if (bin_width_us_ != other.bin_width_us_)
        throw ConfigMismatch("bin width mismatch on merge");
    if (epoch_fixed_ != other.epoch_fixed_ ||
        (epoch_fixed_ && epoch_us_ != other.epoch_us_))
        throw ConfigMismatch("epoch mismatch on merge");
    if (!epoch_fixed_) epoch_us_ = std::min(epoch_us_, other.epoch_us_);

    for (auto& [key, ost] : other.ips_) {
        auto [it, inserted] = ips_.try_emplace(key, ost);
        if (inserted) continue;
        IpState& st = it->second;
        st.packet_count += ost.packet_count;
        st.first_seen = std::min(st.first_seen, ost.first_seen);
        st.last_seen = std::max(st.last_seen, ost.last_seen);
        for (auto& [bin, obs] : ost.bins) {
            auto [bit, binserted] = st.bins.try_emplace(bin, obs);
            if (binserted) continue;
            BinState& bs = bit->second;
            bs.min_ts = std::min(bs.min_ts, obs.min_ts);
            bs.max_ts = std::max(bs.max_ts, obs.max_ts);
            for (auto& [ttl, c] : obs.ttl_counts) bs.ttl_counts[ttl] += c;
        }
    }
    for (auto& [bin, ports] : other.port_counts_)
        for (auto& [port, c] : ports) port_counts_[bin][port] += c;
    record_count_ += other.record_count_;
}

StateTable StateTable::excise_bins(const std::set<BinIndex>& bins) const {
    StateTable out;
    out.epoch_us_ = epoch_us_;
    out.bin_width_us_ = bin_width_us_;
    out.configured_ = false;
    out.epoch_fixed_ = epoch_fixed_;

    int64_t min_bin_start = INT64_MAX;
    for (auto& [key, st] : ips_) {
        IpState kept;
        for (auto& [bin, bs] : st.bins) {
            if (bins.count(bin)) continue;
            kept.bins.emplace(bin, bs);
            kept.packet_count += bs.packet_count();
        }
        if (kept.packet_count == 0) continue;
        kept.first_seen = kept.bins.begin()->second.min_ts;
        kept.last_seen = 0;
        for (auto& [bin, bs] : kept.bins) {
            kept.first_seen = std::min(kept.first_seen, bs.min_ts);
            kept.last_seen = std::max(kept.last_seen, bs.max_ts);
            min_bin_start = std::min(min_bin_start, bs.min_ts);
        }
        out.record_count_ += kept.packet_count;
        out.ips_.emplace(key, std::move(kept));
    }
    for (auto& [bin, ports] : port_counts_) {
        if (bins.count(bin)) continue;
        out.port_counts_.emplace(bin, ports);
    }
    if (epoch_fixed_) {
        out.configured_ = true;
    } else if (min_bin_start != INT64_MAX) {
        out.epoch_us_ = (min_bin_start / bin_width_us_) * bin_width_us_;
        out.configured_ = true;
    } else {
        out.epoch_us_ = 0;  // matches a never-ingested auto-epoch table
    }
    return out;
}

const IpState* StateTable::find(const IpKey& key) const {
    auto it = ips_.find(key);
    return it == ips_.end() ? nullptr : &it->second;
}

std::pair<BinIndex, BinIndex> StateTable::bin_range() const {
    if (port_counts_.empty()) return {0, -1};
    return {port_counts_.begin()->first, port_counts_.rbegin()->first};
}

bool operator==(const StateTable& a, const StateTable& b) {
    return a.epoch_us_ == b.epoch_us_ && a.bin_width_us_ == b.bin_width_us_ &&
           a.record_count_ == b.record_count_ && a.configured_ == b.configured_ &&
           a.epoch_fixed_ == b.epoch_fixed_ && a.ips_ == b.ips_ &&
           a.port_counts_ == b.port_counts_;
}

namespace {
using nlohmann::json;
constexpr int kSnapshotVersion = 1;
}  // namespace

void StateTable::write_snapshot(std::ostream& out) const {
    json meta;
    meta["version"] = kSnapshotVersion;
    meta["epoch_us"] = epoch_us_;
    meta["bin_width_us"] = bin_width_us_;
    meta["epoch_fixed"] = epoch_fixed_;
    meta["record_count"] = record_count_;
    json ports = json::object();
    for (auto& [bin, pc] : port_counts_) {
        json p = json::object();
        for (auto& [port, c] : pc) p[std::to_string(port)] = c;
        ports[std::to_string(bin)] = std::move(p);
    }
    meta["port_counts"] = std::move(ports);
    out << meta.dump() << '\n';

    for (auto& [key, st] : ips_) {
        json obj;
        obj["ip"] = key.to_string();
        obj["packet_count"] = st.packet_count;
        obj["first_seen"] = st.first_seen;
        obj["last_seen"] = st.last_seen;
        json bins = json::object();
        json spans = json::object();
        for (auto& [bin, bs] : st.bins) {
            json pairs = json::array();
            for (auto& [ttl, c] : bs.ttl_counts)
                pairs.push_back(json::array({ttl, c}));
            bins[std::to_string(bin)] = std::move(pairs);
            spans[std::to_string(bin)] = json::array({bs.min_ts, bs.max_ts});
        }
        obj["bins"] = std::move(bins);
        obj["bin_spans"] = std::move(spans);
        out << obj.dump() << '\n';
    }
}

StateTable StateTable::read_snapshot(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty snapshot");
    json meta = json::parse(line);
    if (meta.at("version").get<int>() != kSnapshotVersion)
        throw std::runtime_error("unsupported snapshot version");

    StateTable t;
    t.epoch_us_ = meta.at("epoch_us").get<int64_t>();
    t.bin_width_us_ = meta.at("bin_width_us").get<int64_t>();
    t.epoch_fixed_ = meta.at("epoch_fixed").get<bool>();
    t.record_count_ = meta.at("record_count").get<uint64_t>();
    t.configured_ = true;
    for (auto& [bin, ports] : meta.at("port_counts").items()) {
        auto& dst = t.port_counts_[std::stoll(bin)];
        for (auto& [port, c] : ports.items())
            dst[static_cast<uint16_t>(std::stoul(port))] = c.get<uint64_t>();
    }

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json obj = json::parse(line);
        IpState st;
        st.packet_count = obj.at("packet_count").get<uint64_t>();
        st.first_seen = obj.at("first_seen").get<int64_t>();
        st.last_seen = obj.at("last_seen").get<int64_t>();
        auto& spans = obj.at("bin_spans");
        for (auto& [bin, pairs] : obj.at("bins").items()) {
            BinState bs;
            for (auto& pair : pairs)
                bs.ttl_counts[pair.at(0).get<uint8_t>()] = pair.at(1).get<uint64_t>();
            auto& span = spans.at(bin);
            bs.min_ts = span.at(0).get<int64_t>();
            bs.max_ts = span.at(1).get<int64_t>();
            st.bins.emplace(std::stoll(bin), std::move(bs));
        }
        t.ips_.emplace(IpKey::parse(obj.at("ip").get<std::string>()), std::move(st));
    }
    return t;
}

}  // namespace ttlkit
