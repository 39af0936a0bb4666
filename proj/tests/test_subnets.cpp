#include <doctest.h>

#include <random>
#include <sstream>

#include "ttlkit/subnets.hpp"

using namespace ttlkit;

TEST_CASE("subnet grouping and stability metrics") {
    HostHops hosts;
    // 10.0.0.0/24: tight cluster around 14
    hosts[IpKey::parse("10.0.0.1")] = 14;
    hosts[IpKey::parse("10.0.0.2")] = 14;
    hosts[IpKey::parse("10.0.0.3")] = 15;
    hosts[IpKey::parse("10.0.0.4")] = 13;
    // 10.0.1.0/24: scattered
    hosts[IpKey::parse("10.0.1.1")] = 5;
    hosts[IpKey::parse("10.0.1.2")] = 20;
    // 10.0.2.0/24: singleton
    hosts[IpKey::parse("10.0.2.1")] = 9;

    auto stats = subnet_stats(hosts, 24);
    REQUIRE(stats.size() == 3);

    const SubnetStats& tight = stats[0];
    CHECK(tight.prefix == Cidr::parse("10.0.0.0/24"));
    CHECK(tight.host_count == 4);
    CHECK(tight.hc_amplitude == 2);
    CHECK(tight.median_pm1_coverage == 1.0);  // lower median 14, all within +/-1
    CHECK(tight.hc_stddev == doctest::Approx(std::sqrt(0.5)));

    const SubnetStats& scattered = stats[1];
    CHECK(scattered.hc_amplitude == 15);
    CHECK(scattered.median_pm1_coverage == doctest::Approx(0.5));
    CHECK(scattered.hc_stddev == doctest::Approx(7.5));

    const SubnetStats& singleton = stats[2];
    CHECK(singleton.host_count == 1);
    CHECK(singleton.hc_stddev == 0.0);
    CHECK(singleton.median_pm1_coverage == 1.0);
}

TEST_CASE("lower median for even host counts") {
    HostHops hosts;
    hosts[IpKey::parse("10.0.0.1")] = 10;
    hosts[IpKey::parse("10.0.0.2")] = 13;
    auto stats = subnet_stats(hosts, 24);
    REQUIRE(stats.size() == 1);
    // lower median is 10: only one host within +/-1
    CHECK(stats[0].median_pm1_coverage == doctest::Approx(0.5));
}

TEST_CASE("subnet host counts reconcile with the input") {
    std::mt19937_64 rng(3);
    HostHops hosts;
    for (int i = 0; i < 300; ++i) {
        char ip[32];
        std::snprintf(ip, sizeof(ip), "10.%d.%d.%d", int(rng() % 4), int(rng() % 4),
                      int(rng() % 200));
        hosts[IpKey::parse(ip)] = static_cast<int>(rng() % 30);
    }
    for (uint8_t len : {8, 16, 24, 32}) {
        auto stats = subnet_stats(hosts, len);
        uint64_t total = 0;
        for (auto& s : stats) {
            total += s.host_count;
            CHECK(s.hc_amplitude >= 0);
            CHECK(s.median_pm1_coverage >= 0.0);
            CHECK(s.median_pm1_coverage <= 1.0);
            if (s.host_count == 1) CHECK(s.hc_stddev == 0.0);
        }
        CHECK(total == hosts.size());
    }
    CHECK_THROWS_AS(subnet_stats(hosts, 33), std::invalid_argument);
}

TEST_CASE("rib loading and longest-prefix assignment") {
    std::istringstream rib_csv(
        "prefix,as_path_len\n"
        "10.0.0.0/8,4\n"
        "10.1.0.0/16,2\n"
        "2001:db8::/32,5\n");
    auto rib = load_rib(rib_csv);
    REQUIRE(rib.size() == 3);
    auto index = index_rib(rib);

    auto broad = assign_prefix(IpKey::parse("10.7.7.7"), index);
    REQUIRE(broad.has_value());
    CHECK(broad->prefix == Cidr::parse("10.0.0.0/8"));
    CHECK(broad->as_path_length == 4);

    auto specific = assign_prefix(IpKey::parse("10.1.2.3"), index);
    REQUIRE(specific.has_value());
    CHECK(specific->prefix == Cidr::parse("10.1.0.0/16"));
    CHECK(specific->as_path_length == 2);

    CHECK(assign_prefix(IpKey::parse("2001:db8::9"), index)->as_path_length == 5);
    CHECK(!assign_prefix(IpKey::parse("192.0.2.1"), index).has_value());

    std::istringstream bad("10.0.0.0/8,0\n");
    CHECK_THROWS_AS(load_rib(bad), ParseError);
}

TEST_CASE("mean hop count per prefix") {
    std::istringstream rib_csv("10.0.0.0/8,4\n10.1.0.0/16,2\n");
    auto index = index_rib(load_rib(rib_csv));
    HostHops hosts;
    hosts[IpKey::parse("10.0.0.1")] = 10;
    hosts[IpKey::parse("10.0.0.2")] = 12;
    hosts[IpKey::parse("10.1.0.1")] = 5;
    hosts[IpKey::parse("192.0.2.1")] = 30;  // uncovered, dropped

    auto means = mean_hc_per_prefix(hosts, index);
    REQUIRE(means.size() == 2);
    CHECK(means[Cidr::parse("10.0.0.0/8")] == doctest::Approx(11.0));
    CHECK(means[Cidr::parse("10.1.0.0/16")] == doctest::Approx(5.0));
}

TEST_CASE("regression recovers a known line") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<std::pair<double, double>> points;
    for (int i = 0; i < 200; ++i) {
        const double x = 1.0 + static_cast<double>(rng() % 8);
        points.emplace_back(x, 1.14 * x + 3.0 + noise(rng));
    }
    auto r = regress(points);
    CHECK(r.slope == doctest::Approx(1.14).epsilon(0.05));
    CHECK(r.intercept == doctest::Approx(3.0).epsilon(0.05));
    CHECK(r.p_value < 1e-6);
    CHECK(r.r_squared > 0.8);
    // the true slope sits inside the reported confidence interval
    CHECK(std::abs(r.slope - 1.14) < r.slope_ci95_halfwidth() * 2);
}

TEST_CASE("regression on an exact line") {
    std::vector<std::pair<double, double>> points{{1, 2}, {2, 4}, {3, 6}, {4, 8}};
    auto r = regress(points);
    CHECK(r.slope == doctest::Approx(2.0));
    CHECK(r.intercept == doctest::Approx(0.0));
    CHECK(r.r_squared == doctest::Approx(1.0));
    CHECK(r.p_value < 1e-100);
}

TEST_CASE("flat noise yields an insignificant slope") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(10.0, 1.0);
    std::vector<std::pair<double, double>> points;
    for (int i = 0; i < 100; ++i)
        points.emplace_back(static_cast<double>(i % 10), noise(rng));
    auto r = regress(points);
    CHECK(std::abs(r.slope) < 0.2);
    CHECK(r.p_value > 0.01);
    CHECK(r.r_squared < 0.1);
}

TEST_CASE("degenerate regressions are rejected") {
    CHECK_THROWS_AS(regress({{1, 2}, {2, 4}}), DegenerateRegression);
    CHECK_THROWS_AS(regress({{1, 2}, {1, 4}, {1, 6}}), DegenerateRegression);
}
