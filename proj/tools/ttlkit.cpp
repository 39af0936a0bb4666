// ttlkit command line: wires ingestion, classification, distributions,
// anomaly detection, probe correlation, subnet/BGP analysis and the
// synthetic trace generator into file-based subcommands.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttlkit/anomaly.hpp"
#include "ttlkit/distribution.hpp"
#include "ttlkit/hopcount.hpp"
#include "ttlkit/kernels.hpp"
#include "ttlkit/pingback.hpp"
#include "ttlkit/stability.hpp"
#include "ttlkit/state.hpp"
#include "ttlkit/subnets.hpp"
#include "ttlkit/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ttlkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDataError = 1;
constexpr int kExitUsage = 2;

/// Writes via a temp file in the same directory, then renames.
void atomic_write(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

struct TableOptions {
    std::string records_path;
    std::string snapshot_path;
    int64_t bin_width_s = 600;
    int64_t epoch_us = -1;  // -1: derive from data
    bool skip_bad = false;
};

void add_table_options(CLI::App* cmd, TableOptions& opt, bool required = true) {
    auto* in = cmd->add_option("--in", opt.records_path, "record CSV input");
    auto* snap = cmd->add_option("--snapshot", opt.snapshot_path, "state snapshot input");
    in->excludes(snap);
    if (required) {
        // one of the two must be given; checked after parse
    }
    cmd->add_option("--bin-width", opt.bin_width_s, "bin width in seconds")
        ->default_val(600);
    cmd->add_option("--epoch-us", opt.epoch_us,
                    "explicit capture epoch in microseconds (default: derived)");
    cmd->add_flag("--skip-bad", opt.skip_bad, "skip malformed rows instead of failing");
}

StateTable load_table(const TableOptions& opt, uint64_t* skipped = nullptr) {
    if (!opt.snapshot_path.empty()) {
        auto in = open_input(opt.snapshot_path);
        return StateTable::read_snapshot(in);
    }
    if (opt.records_path.empty())
        throw CLI::ValidationError("--in or --snapshot is required");
    StateTable table = opt.epoch_us >= 0
                           ? StateTable(opt.epoch_us, opt.bin_width_s * 1'000'000)
                           : StateTable::auto_epoch(opt.bin_width_s * 1'000'000);
    auto in = open_input(opt.records_path);
    RecordReader reader(in, opt.skip_bad ? ReadPolicy::skip_and_count : ReadPolicy::strict);
    while (auto rec = reader.next()) table.ingest(*rec);
    if (skipped) *skipped = reader.skipped();
    return table;
}

json config_json(const TableOptions& opt) {
    json j;
    j["records"] = opt.records_path;
    j["snapshot"] = opt.snapshot_path;
    j["bin_width_s"] = opt.bin_width_s;
    if (opt.epoch_us >= 0) j["epoch_us"] = opt.epoch_us;
    j["skip_bad"] = opt.skip_bad;
    return j;
}

std::string domain_name(ValueDomain d) { return d == ValueDomain::ttl ? "ttl" : "hop_count"; }
std::string counting_name(Counting c) {
    return c == Counting::per_ip ? "per_ip" : "per_packet";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TTL / hop-count anomaly analysis toolkit"};
    app.require_subcommand(1);

    // ---- ingest ----
    TableOptions ingest_opt;
    std::string ingest_out;
    auto* ingest_cmd = app.add_subcommand("ingest", "build a binned state snapshot");
    add_table_options(ingest_cmd, ingest_opt);
    ingest_cmd->add_option("--out", ingest_out, "snapshot NDJSON output")->required();

    // ---- classify ----
    TableOptions classify_opt;
    std::string classify_out, classify_csv;
    bool wallclock = false;
    auto* classify_cmd = app.add_subcommand("classify", "stability decision-tree report");
    add_table_options(classify_cmd, classify_opt);
    classify_cmd->add_option("--out", classify_out, "report JSON output")->required();
    classify_cmd->add_option("--csv", classify_csv, "CSV mirror of the report");
    classify_cmd->add_flag("--wallclock-adjacency", wallclock,
                           "treat only numerically consecutive bins as adjacent");

    // ---- dist ----
    TableOptions dist_opt;
    std::string dist_out, dist_domain = "ttl", dist_counting = "per-ip", dist_family = "all";
    auto* dist_cmd = app.add_subcommand("dist", "empirical TTL/HC distribution as CSV");
    add_table_options(dist_cmd, dist_opt);
    dist_cmd->add_option("--domain", dist_domain)->check(CLI::IsMember({"ttl", "hc"}));
    dist_cmd->add_option("--counting", dist_counting)
        ->check(CLI::IsMember({"per-ip", "per-packet"}));
    dist_cmd->add_option("--family", dist_family)->check(CLI::IsMember({"v4", "v6", "all"}));
    dist_cmd->add_option("--out", dist_out, "CSV output `value,probability`")->required();

    // ---- collide ----
    TableOptions collide_opt;
    bool collide_flow = false, collide_exact_mode = false;
    uint64_t collide_n = 0, collide_ports = 65000;
    std::string collide_domain = "ttl", collide_counting = "per-ip", collide_family = "all";
    auto* collide_cmd = app.add_subcommand("collide", "collision probabilities");
    add_table_options(collide_cmd, collide_opt, false);
    collide_cmd->add_flag("--flow", collide_flow, "birthday-problem 4-flow collision");
    collide_cmd->add_option("--n", collide_n, "window size / concurrent users")->required();
    collide_cmd->add_option("--ports", collide_ports, "ephemeral port pool size");
    collide_cmd->add_flag("--exact", collide_exact_mode,
                          "same-or-exactly-n form instead of cumulative window");
    collide_cmd->add_option("--domain", collide_domain)->check(CLI::IsMember({"ttl", "hc"}));
    collide_cmd->add_option("--counting", collide_counting)
        ->check(CLI::IsMember({"per-ip", "per-packet"}));
    collide_cmd->add_option("--family", collide_family)
        ->check(CLI::IsMember({"v4", "v6", "all"}));

    // ---- amplitude ----
    TableOptions amp_opt;
    std::string amp_out, amp_metric = "ttl";
    auto* amp_cmd = app.add_subcommand("amplitude", "per-IP amplitude ECDF plot data");
    add_table_options(amp_cmd, amp_opt);
    amp_cmd->add_option("--metric", amp_metric)->check(CLI::IsMember({"ttl", "hc"}));
    amp_cmd->add_option("--out", amp_out, "CSV output `amplitude,ecdf`")->required();

    // ---- detect ----
    TableOptions detect_opt;
    std::string detect_out, detect_geo;
    size_t detect_window_bins = 6;
    double detect_threshold = 0.4;
    size_t detect_topk = 5;
    double detect_share_threshold = 0.99, detect_single_threshold = 0.95;
    auto* detect_cmd = app.add_subcommand("detect", "flood anomaly detection");
    add_table_options(detect_cmd, detect_opt);
    detect_cmd->add_option("--window-bins", detect_window_bins, "spike window in bins");
    detect_cmd->add_option("--threshold", detect_threshold, "new-IP ratio threshold");
    detect_cmd->add_option("--top-k", detect_topk, "TTL concentration depth");
    detect_cmd->add_option("--share-threshold", detect_share_threshold,
                           "combined top-k share flag threshold");
    detect_cmd->add_option("--single-packet-threshold", detect_single_threshold,
                           "single-packet IP ratio flag threshold");
    detect_cmd->add_option("--geo", detect_geo, "optional prefix,country CSV");
    detect_cmd->add_option("--out", detect_out, "anomaly report JSON")->required();

    // ---- verdict ----
    TableOptions verdict_opt;
    std::string verdict_basis = "ttl";
    unsigned verdict_n = 0;
    auto* verdict_cmd =
        app.add_subcommand("verdict", "per-packet verdicts: records on stdin, CSV on stdout");
    add_table_options(verdict_cmd, verdict_opt);
    verdict_cmd->add_option("--basis", verdict_basis)->check(CLI::IsMember({"ttl", "hc"}));
    verdict_cmd->add_option("--n", verdict_n, "NearMatch acceptance window");

    // ---- pingback ----
    std::string pb_targets, pb_replies, pb_out, pb_passive;
    int pb_offset = 3;
    auto* pb_cmd = app.add_subcommand("pingback", "probe-result stability analysis");
    pb_cmd->add_option("--targets", pb_targets, "targets CSV `run_id,ip`")->required();
    pb_cmd->add_option("--replies", pb_replies, "replies CSV `run_id,ts_us,ip,raw_ttl`")
        ->required();
    pb_cmd->add_option("--offset", pb_offset, "hop offset added to raw TTLs");
    pb_cmd->add_option("--passive", pb_passive,
                       "record CSV; cross-correlates passive multi-TTL IPs");
    pb_cmd->add_option("--out", pb_out, "report JSON")->required();

    // ---- subnet ----
    std::string subnet_hosts, subnet_out;
    unsigned subnet_len = 24;
    auto* subnet_cmd = app.add_subcommand("subnet", "per-subnet hop-count stability");
    subnet_cmd->add_option("--hosts", subnet_hosts, "CSV `ip,hop_count`")->required();
    subnet_cmd->add_option("--prefix-len", subnet_len, "subnet size in prefix bits");
    subnet_cmd->add_option("--out", subnet_out, "SubnetStats CSV output")->required();

    // ---- bgp ----
    std::string bgp_hosts, bgp_rib, bgp_out, bgp_points;
    auto* bgp_cmd = app.add_subcommand("bgp", "AS-path-length vs hop-count regression");
    bgp_cmd->add_option("--hosts", bgp_hosts, "CSV `ip,hop_count`")->required();
    bgp_cmd->add_option("--rib", bgp_rib, "RIB CSV `prefix,as_path_len`")->required();
    bgp_cmd->add_option("--out", bgp_out, "regression JSON")->required();
    bgp_cmd->add_option("--points", bgp_points, "plot data CSV `as_path_len,mean_hc`");

    // ---- synth ----
    std::string synth_spec, synth_dir;
    int64_t synth_seed = -1;
    auto* synth_cmd = app.add_subcommand("synth", "deterministic synthetic scenario");
    synth_cmd->add_option("--spec", synth_spec, "scenario spec JSON")->required();
    synth_cmd->add_option("--out-dir", synth_dir, "output directory")->required();
    synth_cmd->add_option("--seed", synth_seed, "override the spec's seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*ingest_cmd) {
            uint64_t skipped = 0;
            StateTable table = load_table(ingest_opt, &skipped);
            std::ostringstream out;
            table.write_snapshot(out);
            atomic_write(ingest_out, out.str());
            std::cerr << "ingested " << table.record_count() << " records, "
                      << table.ips().size() << " IPs";
            if (skipped) std::cerr << ", skipped " << skipped << " bad rows";
            std::cerr << '\n';
        } else if (*classify_cmd) {
            StateTable table = load_table(classify_opt);
            const auto adjacency = wallclock ? MixbinAdjacency::wall_clock
                                             : MixbinAdjacency::activity_order;
            StabilityReport report = summarize(table, adjacency);
            json j = json::parse(report_to_json(report));
            j["config"] = config_json(classify_opt);
            j["config"]["adjacency"] = wallclock ? "wall_clock" : "activity_order";
            atomic_write(classify_out, j.dump(2) + "\n");
            if (!classify_csv.empty()) atomic_write(classify_csv, report_to_csv(report));
        } else if (*dist_cmd) {
            StateTable table = load_table(dist_opt);
            const auto domain = dist_domain == "ttl" ? ValueDomain::ttl : ValueDomain::hop_count;
            const auto counting =
                dist_counting == "per-ip" ? Counting::per_ip : Counting::per_packet;
            EmpiricalDistribution d =
                dist_family == "all"
                    ? build_distribution(table, domain, counting)
                    : build_distribution(table, domain, counting,
                                         dist_family == "v4" ? Family::v4 : Family::v6);
            std::ostringstream out;
            out << "value,probability\n";
            for (int v = 0; v < 256; ++v)
                if (d.p[v] > 0.0) out << v << ',' << d.p[v] << '\n';
            atomic_write(dist_out, out.str());
        } else if (*collide_cmd) {
            char buf[64];
            if (collide_flow) {
                FlowCollision fc = flow_collision(collide_n, collide_ports);
                std::snprintf(buf, sizeof(buf), "%.6f", fc.probability);
                std::cout << buf << (fc.saturated ? " (saturated)" : "") << '\n';
            } else {
                StateTable table = load_table(collide_opt);
                const auto domain =
                    collide_domain == "ttl" ? ValueDomain::ttl : ValueDomain::hop_count;
                const auto counting =
                    collide_counting == "per-ip" ? Counting::per_ip : Counting::per_packet;
                EmpiricalDistribution d =
                    collide_family == "all"
                        ? build_distribution(table, domain, counting)
                        : build_distribution(table, domain, counting,
                                             collide_family == "v4" ? Family::v4 : Family::v6);
                const double p = collide_exact_mode
                                     ? collision_exact(d, static_cast<unsigned>(collide_n))
                                     : collision_window(d, static_cast<unsigned>(collide_n));
                std::snprintf(buf, sizeof(buf), "%.6f", p);
                std::cout << buf << '\n';
            }
        } else if (*amp_cmd) {
            StateTable table = load_table(amp_opt);
            std::map<int, uint64_t> counts;
            uint64_t total = 0;
            for (auto& [key, st] : table.ips()) {
                const int a = amp_metric == "ttl" ? ttl_amplitude(st) : hc_amplitude(st);
                ++counts[a];
                ++total;
            }
            std::ostringstream out;
            out << "amplitude,ecdf\n";
            uint64_t acc = 0;
            for (auto& [a, c] : counts) {
                acc += c;
                out << a << ',' << (static_cast<double>(acc) / static_cast<double>(total))
                    << '\n';
            }
            atomic_write(amp_out, out.str());
        } else if (*detect_cmd) {
            StateTable table = load_table(detect_opt);
            GeoTable geo;
            if (!detect_geo.empty()) {
                auto in = open_input(detect_geo);
                geo = load_geo_table(in);
            }
            auto windows = accumulation_spikes(table, detect_window_bins, detect_threshold);
            json j;
            j["config"] = config_json(detect_opt);
            j["config"]["window_bins"] = detect_window_bins;
            j["config"]["threshold"] = detect_threshold;
            j["config"]["top_k"] = detect_topk;
            j["config"]["share_threshold"] = detect_share_threshold;
            j["config"]["single_packet_threshold"] = detect_single_threshold;
            j["windows"] = json::array();
            for (auto& w : windows) {
                ConcentrationReport report =
                    concentration(table, w.first_bin, w.last_bin, detect_topk,
                                  detect_geo.empty() ? nullptr : &geo);
                FlagResult fr = flag(report, {detect_share_threshold, detect_single_threshold});
                json wj;
                wj["first_bin"] = w.first_bin;
                wj["last_bin"] = w.last_bin;
                wj["new_ip_count"] = w.new_ip_count;
                wj["new_ip_ratio"] = w.new_ip_ratio;
                wj["window_packets"] = report.window_packets;
                wj["window_ips"] = report.window_ips;
                wj["combined_top_share"] = report.combined_top_share;
                wj["single_packet_ip_ratio"] = report.single_packet_ip_ratio;
                wj["top_port"] = report.top_port;
                wj["top_port_share"] = report.top_port_share;
                wj["top_ttls"] = json::array();
                for (auto& t : report.top_ttls) {
                    json tj;
                    tj["ttl"] = t.ttl;
                    tj["packets"] = t.packets;
                    tj["share"] = t.share;
                    if (t.countries) tj["countries"] = *t.countries;
                    wj["top_ttls"].push_back(tj);
                }
                wj["flagged"] = fr.flagged;
                wj["reasons"] = fr.reasons;
                j["windows"].push_back(wj);
            }
            atomic_write(detect_out, j.dump(2) + "\n");
        } else if (*verdict_cmd) {
            StateTable table = load_table(verdict_opt);
            VerdictPolicy policy;
            policy.basis =
                verdict_basis == "ttl" ? VerdictBasis::ttl : VerdictBasis::hop_count;
            policy.n = verdict_n;
            RecordReader reader(std::cin, ReadPolicy::strict);
            std::cout << "ip,verdict,basis,distance\n";
            while (auto rec = reader.next()) {
                Verdict v = verdict(table, *rec, policy);
                std::cout << rec->ip.to_string() << ',' << to_string(v.kind) << ','
                          << verdict_basis << ',' << v.distance << '\n';
            }
        } else if (*pb_cmd) {
            auto targets = open_input(pb_targets);
            auto replies = open_input(pb_replies);
            ProbeState state = ingest_probes(targets, replies, pb_offset);
            json j;
            j["config"] = {{"targets", pb_targets}, {"replies", pb_replies},
                           {"offset", pb_offset}};
            json hist = json::object();
            for (auto& [k, v] : run_ttl_counts(state)) hist[std::to_string(k)] = v;
            j["run_ttl_counts"] = hist;
            j["quarantined_replies"] = state.quarantine.size();

            std::map<std::string, uint64_t> classes;
            for (auto& [ip, st] : state.ips) ++classes[to_string(longitudinal(state, ip))];
            j["longitudinal"] = classes;

            if (!pb_passive.empty()) {
                TableOptions opt;
                opt.records_path = pb_passive;
                StateTable table = load_table(opt);
                std::set<IpKey> multi;
                for (auto& [key, st] : table.ips())
                    if (st.distinct_ttls().size() > 1) multi.insert(key);
                CrossReport cr = cross_correlate(multi, state);
                const double base = cr.passive_multi_ttl ? cr.passive_multi_ttl : 1;
                j["cross"] = {
                    {"passive_multi_ttl", cr.passive_multi_ttl},
                    {"one_ttl", cr.one_ttl},
                    {"one_ttl_pct", 100.0 * cr.one_ttl / base},
                    {"bin_stable", cr.bin_stable},
                    {"bin_stable_pct", 100.0 * cr.bin_stable / base},
                    {"bin_unstable", cr.bin_unstable},
                    {"bin_unstable_pct", 100.0 * cr.bin_unstable / base},
                    {"no_response", cr.no_response},
                    {"no_response_pct", 100.0 * cr.no_response / base},
                };
            }
            atomic_write(pb_out, j.dump(2) + "\n");
        } else if (*subnet_cmd) {
            HostHops hosts;
            auto in = open_input(subnet_hosts);
            std::string line;
            size_t line_no = 0;
            while (std::getline(in, line)) {
                ++line_no;
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (line.empty() || line == "ip,hop_count") continue;
                const size_t comma = line.find(',');
                if (comma == std::string::npos)
                    throw ParseError("expected ip,hop_count", line_no, "");
                hosts[IpKey::parse(std::string_view(line).substr(0, comma))] =
                    std::stoi(line.substr(comma + 1));
            }
            auto stats = subnet_stats(hosts, static_cast<uint8_t>(subnet_len));
            std::ostringstream out;
            out << "prefix,host_count,hc_stddev,hc_amplitude,median_pm1_coverage\n";
            for (auto& s : stats)
                out << s.prefix.to_string() << ',' << s.host_count << ',' << s.hc_stddev
                    << ',' << s.hc_amplitude << ',' << s.median_pm1_coverage << '\n';
            atomic_write(subnet_out, out.str());
        } else if (*bgp_cmd) {
            HostHops hosts;
            {
                auto in = open_input(bgp_hosts);
                std::string line;
                size_t line_no = 0;
                while (std::getline(in, line)) {
                    ++line_no;
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    if (line.empty() || line == "ip,hop_count") continue;
                    const size_t comma = line.find(',');
                    if (comma == std::string::npos)
                        throw ParseError("expected ip,hop_count", line_no, "");
                    hosts[IpKey::parse(std::string_view(line).substr(0, comma))] =
                        std::stoi(line.substr(comma + 1));
                }
            }
            auto rib_in = open_input(bgp_rib);
            auto rib = load_rib(rib_in);
            RibIndex index = index_rib(rib);
            auto means = mean_hc_per_prefix(hosts, index);

            std::vector<std::pair<double, double>> points;
            std::ostringstream pts;
            pts << "as_path_len,mean_hc\n";
            for (auto& [prefix, mean] : means) {
                auto hit = index.lookup(prefix.base);
                if (!hit) continue;
                points.push_back({static_cast<double>(hit->second), mean});
                pts << hit->second << ',' << mean << '\n';
            }
            if (!bgp_points.empty()) atomic_write(bgp_points, pts.str());

            RegressionResult r = regress(points);
            json j;
            j["config"] = {{"hosts", bgp_hosts}, {"rib", bgp_rib}};
            j["slope"] = r.slope;
            j["intercept"] = r.intercept;
            j["r_squared"] = r.r_squared;
            j["p_value"] = r.p_value;
            j["p_value_test"] = "two-sided t-test on slope vs zero";
            j["slope_stderr"] = r.slope_stderr;
            j["sample_count"] = r.sample_count;
            atomic_write(bgp_out, j.dump(2) + "\n");
        } else if (*synth_cmd) {
            std::ifstream spec_in = open_input(synth_spec);
            std::stringstream buf;
            buf << spec_in.rdbuf();
            synth::ScenarioSpec spec = synth::ScenarioSpec::from_json(buf.str());
            if (synth_seed >= 0) spec.seed = static_cast<uint64_t>(synth_seed);
            synth::Scenario scenario = synth::generate(spec);

            fs::create_directories(synth_dir);
            const fs::path dir(synth_dir);
            {
                std::ostringstream out;
                synth::write_records_csv(out, scenario.records);
                atomic_write(dir / "records.csv", out.str());
            }
            {
                std::ostringstream targets, replies;
                synth::write_probe_files(spec, targets, replies);
                atomic_write(dir / "probe_targets.csv", targets.str());
                atomic_write(dir / "probe_replies.csv", replies.str());
            }
            {
                std::ostringstream out;
                synth::write_ground_truth(out, scenario.truth);
                atomic_write(dir / "ground_truth.ndjson", out.str());
            }
            atomic_write(dir / "scenario.json", spec.to_json() + "\n");
            std::cerr << "wrote " << scenario.records.size() << " records for "
                      << scenario.truth.ips.size() << " IPs to " << synth_dir << '\n';
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDataError;
    }
    return kExitOk;
}
