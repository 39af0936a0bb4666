#include "ttlkit/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>

#include <json.hpp>

namespace ttlkit::synth {

namespace {

using nlohmann::json;

uint64_t mix64(uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 host_rng(const ScenarioSpec& spec, size_t gidx, size_t hidx) {
    return std::mt19937_64(mix64(spec.seed ^ mix64(gidx * 0x10001 + hidx)));
}

IpKey host_address(const HostGroup& g, size_t gidx, size_t hidx) {
    IpKey key{};
    if (g.family == Family::v4) {
        key.family = Family::v4;
        key.bytes[0] = 10;
        key.bytes[1] = static_cast<uint8_t>(gidx + 1);
        key.bytes[2] = static_cast<uint8_t>(hidx >> 8);
        key.bytes[3] = static_cast<uint8_t>(hidx & 0xFF);
    } else {
        key.family = Family::v6;
        key.bytes = {0x20, 0x01, 0x0d, 0xb8, 0, static_cast<uint8_t>(gidx + 1),
                     0, 0, 0, 0, 0, 0,
                     static_cast<uint8_t>(hidx >> 24), static_cast<uint8_t>(hidx >> 16),
                     static_cast<uint8_t>(hidx >> 8), static_cast<uint8_t>(hidx)};
    }
    return key;
}

IpKey attack_address(size_t idx) {
    // spoofed sources drawn from 100.64.0.0/10
    const uint32_t addr = (100u << 24) | (64u << 16) | static_cast<uint32_t>(idx);
    IpKey key{};
    key.family = Family::v4;
    key.bytes[0] = static_cast<uint8_t>(addr >> 24);
    key.bytes[1] = static_cast<uint8_t>(addr >> 16);
    key.bytes[2] = static_cast<uint8_t>(addr >> 8);
    key.bytes[3] = static_cast<uint8_t>(addr);
    return key;
}

void check_feasible(const ScenarioSpec& spec) {
    if (spec.duration_s <= 0 || spec.bin_width_s <= 0)
        throw InfeasibleSpec("duration and bin width must be positive");
    const int64_t nbins = spec.duration_s / spec.bin_width_s;
    for (size_t g = 0; g < spec.groups.size(); ++g) {
        const HostGroup& grp = spec.groups[g];
        const std::string where = "group " + std::to_string(g);
        if (grp.count == 0) throw InfeasibleSpec(where + ": empty group");
        if (grp.count > 65536) throw InfeasibleSpec(where + ": more than 65536 hosts");
        if (grp.hop_count >= grp.start)
            throw InfeasibleSpec(where + ": hop_count >= start value");
        switch (grp.kind) {
            case GroupKind::single_packet:
            case GroupKind::stable:
                break;
            case GroupKind::single_bin_multi_ttl:
            case GroupKind::reassignment:
            case GroupKind::nat_overlap:
                if (grp.hop_count >= grp.second_start)
                    throw InfeasibleSpec(where + ": hop_count >= second start value");
                if (grp.start == grp.second_start)
                    throw InfeasibleSpec(where + ": start values must differ");
                break;
            case GroupKind::routing_churn: {
                const int shifted = grp.hop_count + grp.churn_delta;
                if (grp.churn_delta == 0 || shifted < 0 || shifted >= grp.start)
                    throw InfeasibleSpec(where + ": infeasible churn delta");
                break;
            }
        }
        if ((grp.kind == GroupKind::reassignment && nbins < 3) ||
            (grp.kind == GroupKind::nat_overlap && nbins < 2) ||
            (grp.kind == GroupKind::routing_churn && nbins < 2))
            throw InfeasibleSpec(where + ": not enough bins for this kind");
    }
    if (spec.attack) {
        const AttackSpec& a = *spec.attack;
        if (a.start_s < 0 || a.end_s <= a.start_s || a.end_s > spec.duration_s)
            throw InfeasibleSpec("attack interval outside scenario duration");
        if (a.ttls.empty()) throw InfeasibleSpec("attack needs at least one TTL");
        if (a.source_count == 0 || a.packet_rate == 0)
            throw InfeasibleSpec("attack needs sources and a packet rate");
    }
}

struct HostPlan {
    IpKey ip;
    std::vector<std::pair<int64_t, uint8_t>> packets;  // (ts_us, ttl)
    StabilityLeaf leaf;
};

int64_t bin_start(const ScenarioSpec& spec, int64_t bin) {
    return spec.start_ts_us + bin * spec.bin_width_s * 1'000'000;
}

int64_t ts_in_bin(const ScenarioSpec& spec, int64_t bin, std::mt19937_64& rng) {
    std::uniform_int_distribution<int64_t> d(0, spec.bin_width_s * 1'000'000 - 1);
    return bin_start(spec, bin) + d(rng);
}

HostPlan plan_host(const ScenarioSpec& spec, size_t gidx, size_t hidx) {
    const HostGroup& g = spec.groups[gidx];
    const int64_t nbins = std::max<int64_t>(1, spec.duration_s / spec.bin_width_s);
    auto rng = host_rng(spec, gidx, hidx);
    std::uniform_int_distribution<int64_t> any_ts(
        0, spec.duration_s * 1'000'000 - 1);

    HostPlan plan;
    plan.ip = host_address(g, gidx, hidx);
    const uint8_t ttl_a = static_cast<uint8_t>(g.start - g.hop_count);
    const uint8_t ttl_b = static_cast<uint8_t>(g.second_start - g.hop_count);
    const uint32_t extra = g.packets_per_host;

    switch (g.kind) {
        case GroupKind::single_packet:
            plan.leaf = StabilityLeaf::B1_SinglePacket;
            plan.packets.push_back({spec.start_ts_us + any_ts(rng), ttl_a});
            break;
        case GroupKind::stable: {
            plan.leaf = StabilityLeaf::C1_SingleTTL;
            const uint32_t n = std::max<uint32_t>(2, extra);
            for (uint32_t i = 0; i < n; ++i)
                plan.packets.push_back({spec.start_ts_us + any_ts(rng), ttl_a});
            break;
        }
        case GroupKind::single_bin_multi_ttl: {
            plan.leaf = StabilityLeaf::D1_MultiTTL_SingleBin;
            std::uniform_int_distribution<int64_t> pick(0, nbins - 1);
            const int64_t bin = pick(rng);
            const uint32_t n = std::max<uint32_t>(2, extra);
            for (uint32_t i = 0; i < n; ++i)
                plan.packets.push_back({ts_in_bin(spec, bin, rng), i % 2 ? ttl_b : ttl_a});
            break;
        }
        case GroupKind::reassignment: {
            plan.leaf = StabilityLeaf::E1_SectionStable;
            std::uniform_int_distribution<int64_t> pick(1, nbins - 2);
            const int64_t t = pick(rng);
            plan.packets.push_back({ts_in_bin(spec, t - 1, rng), ttl_a});
            plan.packets.push_back({ts_in_bin(spec, t, rng), ttl_a});
            plan.packets.push_back({ts_in_bin(spec, t, rng), ttl_b});
            plan.packets.push_back({ts_in_bin(spec, t + 1, rng), ttl_b});
            std::uniform_int_distribution<int64_t> side(0, 1);
            for (uint32_t i = 4; i < extra; ++i) {
                if (side(rng) && t >= 2) {
                    std::uniform_int_distribution<int64_t> pre(0, t - 1);
                    plan.packets.push_back({ts_in_bin(spec, pre(rng), rng), ttl_a});
                } else {
                    std::uniform_int_distribution<int64_t> post(t + 1, nbins - 1);
                    plan.packets.push_back({ts_in_bin(spec, post(rng), rng), ttl_b});
                }
            }
            break;
        }
        case GroupKind::routing_churn: {
            plan.leaf = StabilityLeaf::E1_SectionStable;
            const uint8_t ttl_shifted =
                static_cast<uint8_t>(g.start - (g.hop_count + g.churn_delta));
            std::uniform_int_distribution<int64_t> pick(1, nbins - 1);
            const int64_t s = pick(rng);
            plan.packets.push_back({ts_in_bin(spec, s - 1, rng), ttl_a});
            plan.packets.push_back({ts_in_bin(spec, s, rng), ttl_shifted});
            for (uint32_t i = 2; i < extra; ++i) {
                std::uniform_int_distribution<int64_t> any_bin(0, nbins - 1);
                const int64_t b = any_bin(rng);
                plan.packets.push_back({ts_in_bin(spec, b, rng), b < s ? ttl_a : ttl_shifted});
            }
            break;
        }
        case GroupKind::nat_overlap: {
            plan.leaf = StabilityLeaf::E2_Overlapping;
            std::uniform_int_distribution<int64_t> pick(0, nbins - 2);
            const int64_t b = pick(rng);
            for (int64_t bin : {b, b + 1}) {
                plan.packets.push_back({ts_in_bin(spec, bin, rng), ttl_a});
                plan.packets.push_back({ts_in_bin(spec, bin, rng), ttl_b});
            }
            for (uint32_t i = 4; i < extra; ++i)
                plan.packets.push_back({ts_in_bin(spec, b + i % 2, rng), i % 2 ? ttl_b : ttl_a});
            break;
        }
    }
    return plan;
}

std::optional<LongitudinalClass> probe_class_of(const HostGroup& g) {
    switch (g.probe) {
        case ProbeBehavior::stable: return LongitudinalClass::Stable;
        case ProbeBehavior::bin_stable: return LongitudinalClass::BinStable;
        case ProbeBehavior::bin_unstable: return LongitudinalClass::BinUnstable;
        case ProbeBehavior::unresponsive: return std::nullopt;
    }
    return std::nullopt;
}

std::string run_id_of(uint32_t run) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "run%03u", run + 1);
    return buf;
}

std::vector<ProbeReply> host_probe_replies(const ScenarioSpec& spec, size_t gidx,
                                           size_t hidx) {
    const HostGroup& g = spec.groups[gidx];
    std::vector<ProbeReply> out;
    if (g.probe == ProbeBehavior::unresponsive) return out;
    if (spec.probe_runs == 0) return out;

    const IpKey ip = host_address(g, gidx, hidx);
    // anchor value: what the host would emit; raw on the wire is offset lower
    const int corrected = g.start - g.hop_count;
    auto raw_of = [&](int c) {
        const int raw = c - spec.probe_offset;
        if (raw < 0 || raw > 255)
            throw InfeasibleSpec("probe TTL out of range after offset removal");
        return static_cast<uint8_t>(raw);
    };

    for (uint32_t run = 0; run < spec.probe_runs; ++run) {
        const int64_t ts = spec.start_ts_us + run * spec.bin_width_s * 1'000'000;
        std::vector<int> ttls;
        switch (g.probe) {
            case ProbeBehavior::stable:
                ttls = {corrected};
                break;
            case ProbeBehavior::bin_stable:
                // per-run constant, alternating across runs
                ttls = {corrected - static_cast<int>(run % 2)};
                break;
            case ProbeBehavior::bin_unstable:
                if (run == 0)
                    ttls = {corrected, corrected - 1};
                else
                    ttls = {corrected};
                break;
            case ProbeBehavior::unresponsive:
                break;
        }
        for (int c : ttls)
            for (uint32_t rep = 0; rep < std::max<uint32_t>(1, g.replies_per_run); ++rep)
                out.push_back({run_id_of(run), ts, ip, raw_of(c)});
    }
    return out;
}

}  // namespace

Scenario generate(const ScenarioSpec& spec) {
    check_feasible(spec);
    Scenario scenario;
    auto& records = scenario.records;
    auto& truth = scenario.truth;

    std::mt19937_64 rng(mix64(spec.seed));
    std::uniform_int_distribution<int> eph(1024, 65535);

    for (size_t g = 0; g < spec.groups.size(); ++g) {
        const HostGroup& grp = spec.groups[g];
        for (size_t h = 0; h < grp.count; ++h) {
            HostPlan plan = plan_host(spec, g, h);
            truth.ips[plan.ip] = {plan.leaf, probe_class_of(grp), false};
            for (auto& [ts, ttl] : plan.packets) {
                PacketRecord rec;
                rec.ts_us = ts;
                rec.ip = plan.ip;
                rec.proto = 6;
                rec.ext_port = 443;
                rec.int_port = static_cast<uint16_t>(eph(rng));
                rec.ttl = ttl;
                records.push_back(rec);
            }
        }
    }
    truth.genuine_records = {0, records.size()};

    if (spec.attack) {
        const AttackSpec& a = *spec.attack;
        const uint64_t n_packets =
            a.packet_rate * static_cast<uint64_t>(a.end_s - a.start_s);
        const int64_t span_us = (a.end_s - a.start_s) * 1'000'000;
        std::uniform_int_distribution<int64_t> within(0, span_us - 1);
        const size_t spoofed_begin = records.size();
        for (uint64_t i = 0; i < n_packets; ++i) {
            const size_t src = i % a.source_count;
            PacketRecord rec;
            rec.ts_us = spec.start_ts_us + a.start_s * 1'000'000 + within(rng);
            rec.ip = attack_address(src);
            rec.proto = 6;
            rec.ext_port = static_cast<uint16_t>(eph(rng));
            rec.int_port = a.dest_port;
            // each spoofing host sticks to one TTL
            rec.ttl = a.ttls[src % a.ttls.size()];
            records.push_back(rec);

            auto [it, inserted] = truth.ips.try_emplace(rec.ip);
            if (inserted) {
                it->second.leaf = StabilityLeaf::B1_SinglePacket;
                it->second.probe_class = std::nullopt;
                it->second.spoofed = true;
            } else if (it->second.spoofed) {
                it->second.leaf = StabilityLeaf::C1_SingleTTL;  // source reused
            }
        }
        truth.spoofed_records = {spoofed_begin, records.size()};
        const int64_t binw = spec.bin_width_s * 1'000'000;
        const int64_t first = (spec.start_ts_us + a.start_s * 1'000'000) / binw;
        const int64_t last = (spec.start_ts_us + a.end_s * 1'000'000 - 1) / binw;
        truth.attack_bins = {first, last};
    } else {
        truth.spoofed_records = {records.size(), records.size()};
    }
    return scenario;
}

std::vector<ProbeReply> probe_behavior(const ScenarioSpec& spec, const IpKey& ip) {
    for (size_t g = 0; g < spec.groups.size(); ++g)
        for (size_t h = 0; h < spec.groups[g].count; ++h)
            if (host_address(spec.groups[g], g, h) == ip)
                return host_probe_replies(spec, g, h);
    throw std::invalid_argument("ip not part of scenario: " + ip.to_string());
}

void write_records_csv(std::ostream& out, const std::vector<PacketRecord>& records) {
    out << kRecordCsvHeader << '\n';
    for (auto& rec : records) out << serialize_record(rec) << '\n';
}

void write_probe_files(const ScenarioSpec& spec, std::ostream& targets,
                       std::ostream& replies) {
    targets << "run_id,ip\n";
    replies << "run_id,ts_us,ip,raw_ttl\n";
    for (uint32_t run = 0; run < spec.probe_runs; ++run) {
        const std::string id = run_id_of(run);
        for (size_t g = 0; g < spec.groups.size(); ++g)
            for (size_t h = 0; h < spec.groups[g].count; ++h)
                targets << id << ',' << host_address(spec.groups[g], g, h).to_string()
                        << '\n';
    }
    for (size_t g = 0; g < spec.groups.size(); ++g) {
        for (size_t h = 0; h < spec.groups[g].count; ++h) {
            for (auto& r : host_probe_replies(spec, g, h))
                replies << r.run_id << ',' << r.ts_us << ',' << r.ip.to_string() << ','
                        << static_cast<int>(r.raw_ttl) << '\n';
        }
    }
}

void write_ground_truth(std::ostream& out, const GroundTruth& truth) {
    json meta;
    meta["genuine_records"] = {truth.genuine_records.first, truth.genuine_records.second};
    meta["spoofed_records"] = {truth.spoofed_records.first, truth.spoofed_records.second};
    if (truth.attack_bins)
        meta["attack_bins"] = {truth.attack_bins->first, truth.attack_bins->second};
    out << meta.dump() << '\n';

    // deterministic output order
    std::vector<const std::pair<const IpKey, IpTruth>*> rows;
    rows.reserve(truth.ips.size());
    for (auto& kv : truth.ips) rows.push_back(&kv);
    std::sort(rows.begin(), rows.end(),
              [](auto* a, auto* b) { return a->first < b->first; });
    for (auto* kv : rows) {
        json obj;
        obj["ip"] = kv->first.to_string();
        obj["leaf"] = to_string(kv->second.leaf);
        obj["probe_class"] =
            kv->second.probe_class ? to_string(*kv->second.probe_class) : "Unresponsive";
        obj["spoofed"] = kv->second.spoofed;
        out << obj.dump() << '\n';
    }
}

namespace {

const std::map<std::string, GroupKind> kKindNames = {
    {"single_packet", GroupKind::single_packet},
    {"stable", GroupKind::stable},
    {"single_bin_multi_ttl", GroupKind::single_bin_multi_ttl},
    {"reassignment", GroupKind::reassignment},
    {"routing_churn", GroupKind::routing_churn},
    {"nat_overlap", GroupKind::nat_overlap},
};

const std::map<std::string, ProbeBehavior> kProbeNames = {
    {"stable", ProbeBehavior::stable},
    {"bin_stable", ProbeBehavior::bin_stable},
    {"bin_unstable", ProbeBehavior::bin_unstable},
    {"unresponsive", ProbeBehavior::unresponsive},
};

template <typename M>
const std::string& name_of(const M& names, typename M::mapped_type value) {
    for (auto& [name, v] : names)
        if (v == value) return name;
    throw std::logic_error("unnamed enum value");
}

}  // namespace

ScenarioSpec ScenarioSpec::from_json(const std::string& text) {
    json j = json::parse(text);
    ScenarioSpec spec;
    spec.seed = j.value("seed", spec.seed);
    spec.duration_s = j.value("duration_s", spec.duration_s);
    spec.bin_width_s = j.value("bin_width_s", spec.bin_width_s);
    spec.start_ts_us = j.value("start_ts_us", spec.start_ts_us);
    spec.probe_runs = j.value("probe_runs", spec.probe_runs);
    spec.probe_offset = j.value("probe_offset", spec.probe_offset);
    for (auto& g : j.value("groups", json::array())) {
        HostGroup grp;
        grp.kind = kKindNames.at(g.at("kind").get<std::string>());
        grp.family = g.value("family", "v4") == "v6" ? Family::v6 : Family::v4;
        grp.count = g.value("count", grp.count);
        grp.start = g.value("start", grp.start);
        grp.hop_count = g.value("hop_count", grp.hop_count);
        grp.second_start = g.value("second_start", grp.second_start);
        grp.churn_delta = g.value("churn_delta", grp.churn_delta);
        grp.packets_per_host = g.value("packets_per_host", grp.packets_per_host);
        grp.probe = kProbeNames.at(g.value("probe", "stable"));
        grp.replies_per_run = g.value("replies_per_run", grp.replies_per_run);
        spec.groups.push_back(grp);
    }
    if (j.contains("attack")) {
        auto& a = j.at("attack");
        AttackSpec attack;
        attack.start_s = a.at("start_s").get<int64_t>();
        attack.end_s = a.at("end_s").get<int64_t>();
        attack.packet_rate = a.at("packet_rate").get<uint64_t>();
        attack.source_count = a.at("source_count").get<uint32_t>();
        attack.ttls = a.at("ttls").get<std::vector<uint8_t>>();
        attack.dest_port = a.value("dest_port", attack.dest_port);
        spec.attack = attack;
    }
    return spec;
}

std::string ScenarioSpec::to_json() const {
    json j;
    j["seed"] = seed;
    j["duration_s"] = duration_s;
    j["bin_width_s"] = bin_width_s;
    j["start_ts_us"] = start_ts_us;
    j["probe_runs"] = probe_runs;
    j["probe_offset"] = probe_offset;
    j["groups"] = json::array();
    for (auto& g : groups) {
        json obj;
        obj["kind"] = name_of(kKindNames, g.kind);
        obj["family"] = g.family == Family::v6 ? "v6" : "v4";
        obj["count"] = g.count;
        obj["start"] = g.start;
        obj["hop_count"] = g.hop_count;
        obj["second_start"] = g.second_start;
        obj["churn_delta"] = g.churn_delta;
        obj["packets_per_host"] = g.packets_per_host;
        obj["probe"] = name_of(kProbeNames, g.probe);
        obj["replies_per_run"] = g.replies_per_run;
        j["groups"].push_back(obj);
    }
    if (attack) {
        j["attack"] = {{"start_s", attack->start_s},   {"end_s", attack->end_s},
                       {"packet_rate", attack->packet_rate},
                       {"source_count", attack->source_count},
                       {"ttls", attack->ttls},         {"dest_port", attack->dest_port}};
    }
    return j.dump(2);
}

}  // namespace ttlkit::synth
