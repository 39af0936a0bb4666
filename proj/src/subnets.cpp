#include "ttlkit/subnets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

namespace ttlkit {

std::vector<SubnetStats> subnet_stats(const HostHops& hosts, uint8_t prefix_len) {
    if (hosts.empty()) return {};
    std::map<Cidr, std::vector<int>> grouped;
    for (auto& [ip, hc] : hosts) {
        if (prefix_len > (ip.family == Family::v4 ? 32 : 128))
            throw std::invalid_argument("prefix length exceeds family maximum");
        grouped[Cidr{mask_address(ip, prefix_len), prefix_len}].push_back(hc);
    }

    std::vector<SubnetStats> out;
    out.reserve(grouped.size());
    for (auto& [prefix, hcs] : grouped) {
        std::sort(hcs.begin(), hcs.end());
        SubnetStats s;
        s.prefix = prefix;
        s.host_count = hcs.size();
        s.hc_amplitude = hcs.back() - hcs.front();

        double mean = 0.0;
        for (int hc : hcs) mean += hc;
        mean /= static_cast<double>(hcs.size());
        double var = 0.0;
        for (int hc : hcs) var += (hc - mean) * (hc - mean);
        s.hc_stddev = std::sqrt(var / static_cast<double>(hcs.size()));

        const int median = hcs[(hcs.size() - 1) / 2];  // lower median
        size_t covered = 0;
        for (int hc : hcs) covered += std::abs(hc - median) <= 1;
        s.median_pm1_coverage =
            static_cast<double>(covered) / static_cast<double>(hcs.size());
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<PrefixRecord> load_rib(std::istream& in) {
    std::vector<PrefixRecord> rib;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line == "prefix,as_path_len") continue;
        const size_t comma = line.rfind(',');
        if (comma == std::string::npos)
            throw ParseError("expected prefix,as_path_len", line_no, "");
        PrefixRecord rec;
        rec.prefix = Cidr::parse(std::string_view(line).substr(0, comma));
        const std::string_view len = std::string_view(line).substr(comma + 1);
        auto [ptr, ec] = std::from_chars(len.data(), len.data() + len.size(),
                                         rec.as_path_length);
        if (ec != std::errc{} || ptr != len.data() + len.size() || rec.as_path_length < 1)
            throw ParseError("bad as_path_len '" + std::string(len) + "'", line_no,
                             "as_path_len");
        rib.push_back(std::move(rec));
    }
    return rib;
}

RibIndex index_rib(const std::vector<PrefixRecord>& rib) {
    RibIndex index;
    for (auto& rec : rib) index.insert(rec.prefix, rec.as_path_length);
    return index;
}

std::optional<PrefixRecord> assign_prefix(const IpKey& ip, const RibIndex& rib) {
    auto hit = rib.lookup(ip);
    if (!hit) return std::nullopt;
    return PrefixRecord{hit->first, hit->second};
}

std::map<Cidr, double> mean_hc_per_prefix(const HostHops& hosts, const RibIndex& rib) {
    std::map<Cidr, std::pair<double, uint64_t>> sums;
    for (auto& [ip, hc] : hosts) {
        auto hit = rib.lookup(ip);
        if (!hit) continue;
        auto& [sum, count] = sums[hit->first];
        sum += hc;
        ++count;
    }
    std::map<Cidr, double> means;
    for (auto& [prefix, sc] : sums)
        means[prefix] = sc.first / static_cast<double>(sc.second);
    return means;
}

double RegressionResult::slope_ci95_halfwidth() const {
    if (sample_count < 3) return 0.0;
    boost::math::students_t dist(static_cast<double>(sample_count - 2));
    return boost::math::quantile(dist, 0.975) * slope_stderr;
}

RegressionResult regress(const std::vector<std::pair<double, double>>& points) {
    const size_t n = points.size();
    if (n < 3) throw DegenerateRegression("regression needs at least 3 points");

    double mx = 0.0, my = 0.0;
    for (auto& [x, y] : points) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (auto& [x, y] : points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0) throw DegenerateRegression("all x values identical");

    RegressionResult r;
    r.sample_count = n;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;

    const double ss_res = std::max(0.0, syy - r.slope * sxy);
    r.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;

    const double dof = static_cast<double>(n - 2);
    const double sigma2 = ss_res / dof;
    r.slope_stderr = std::sqrt(sigma2 / sxx);

    if (r.slope_stderr == 0.0) {
        r.p_value = r.slope == 0.0 ? 1.0 : std::numeric_limits<double>::min();
    } else {
        const double t = r.slope / r.slope_stderr;
        boost::math::students_t dist(dof);
        r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
        r.p_value = std::max(r.p_value, std::numeric_limits<double>::min());
    }
    return r;
}

}  // namespace ttlkit
