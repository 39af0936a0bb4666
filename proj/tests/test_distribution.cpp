#include <doctest.h>

#include <random>

#include "ttlkit/distribution.hpp"

using namespace ttlkit;

namespace {

PacketRecord rec(int64_t ts_s, const char* ip, uint8_t ttl) {
    PacketRecord r;
    r.ts_us = ts_s * 1'000'000;
    r.ip = IpKey::parse(ip);
    r.ttl = ttl;
    return r;
}

EmpiricalDistribution from_mass(std::initializer_list<std::pair<int, double>> mass) {
    EmpiricalDistribution d;
    for (auto& [v, p] : mass) d.p[v] = p;
    return d;
}

}  // namespace

TEST_CASE("per-ip vs per-packet counting") {
    StateTable t;
    for (int i = 0; i < 9; ++i) t.ingest(rec(i, "1.1.1.1", 50));
    t.ingest(rec(10, "1.1.1.1", 114));

    auto per_ip = build_distribution(t, ValueDomain::ttl, Counting::per_ip);
    CHECK(per_ip.p[50] == doctest::Approx(0.5));
    CHECK(per_ip.p[114] == doctest::Approx(0.5));

    auto per_packet = build_distribution(t, ValueDomain::ttl, Counting::per_packet);
    CHECK(per_packet.p[50] == doctest::Approx(0.9));
    CHECK(per_packet.p[114] == doctest::Approx(0.1));
}

TEST_CASE("point mass and two-ip split") {
    StateTable t;
    for (int i = 0; i < 10; ++i) t.ingest(rec(i, "1.1.1.1", 50));
    auto d = build_distribution(t, ValueDomain::ttl, Counting::per_packet);
    CHECK(d.p[50] == doctest::Approx(1.0));
    CHECK(d.support_size() == 1);

    StateTable t2;
    t2.ingest(rec(0, "1.1.1.1", 50));
    t2.ingest(rec(0, "2.2.2.2", 114));
    auto d2 = build_distribution(t2, ValueDomain::ttl, Counting::per_ip);
    CHECK(d2.p[50] == doctest::Approx(0.5));
    CHECK(d2.p[114] == doctest::Approx(0.5));
}

TEST_CASE("hop count domain folds start bands") {
    StateTable t;
    t.ingest(rec(0, "1.1.1.1", 50));
    t.ingest(rec(0, "2.2.2.2", 114));  // both hop count 14
    auto d = build_distribution(t, ValueDomain::hop_count, Counting::per_ip);
    CHECK(d.p[14] == doctest::Approx(1.0));
}

TEST_CASE("empty table throws") {
    CHECK_THROWS_AS(build_distribution(StateTable{}, ValueDomain::ttl, Counting::per_ip),
                    EmptyTable);
}

TEST_CASE("distribution mass sums to one") {
    std::mt19937_64 rng(5);
    StateTable t;
    for (int i = 0; i < 500; ++i) {
        char ip[32];
        std::snprintf(ip, sizeof(ip), "10.0.%d.%d", int(rng() % 8), int(rng() % 8));
        t.ingest(rec(static_cast<int64_t>(rng() % 10000), ip,
                     static_cast<uint8_t>(rng() % 256)));
    }
    for (auto counting : {Counting::per_ip, Counting::per_packet})
        for (auto domain : {ValueDomain::ttl, ValueDomain::hop_count}) {
            auto d = build_distribution(t, domain, counting);
            CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-9));
        }
}

TEST_CASE("collision_exact hand cases") {
    auto uniform4 = from_mass({{10, 0.25}, {20, 0.25}, {30, 0.25}, {40, 0.25}});
    CHECK(collision_exact(uniform4, 0) == doctest::Approx(0.25));

    auto point = from_mass({{100, 1.0}});
    CHECK(collision_exact(point, 0) == doctest::Approx(1.0));
    CHECK(collision_exact(point, 1) == doctest::Approx(1.0));  // same-term only

    auto pair = from_mass({{100, 0.5}, {101, 0.5}});
    // 0.5 same + 0.25 + 0.25 adjacent
    CHECK(collision_exact(pair, 1) == doctest::Approx(1.0));
}

TEST_CASE("collision_window basics") {
    auto pair = from_mass({{100, 0.5}, {101, 0.5}});
    CHECK(collision_window(pair, 0) == doctest::Approx(collision_exact(pair, 0)));

    auto uniform3 = from_mass({{10, 1.0 / 3}, {11, 1.0 / 3}, {12, 1.0 / 3}});
    CHECK(collision_window(uniform3, 2) == doctest::Approx(1.0));
    CHECK(collision_window(uniform3, 255) == 1.0);
}

TEST_CASE("collision_window is monotone in n") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        EmpiricalDistribution d;
        double total = 0;
        for (int i = 0; i < 8; ++i) {
            const int v = static_cast<int>(rng() % 256);
            const double w = 1.0 + static_cast<double>(rng() % 100);
            d.p[v] += w;
            total += w;
        }
        for (auto& p : d.p) p /= total;

        double prev = 0.0;
        for (unsigned n = 0; n <= 255; ++n) {
            const double w = collision_window(d, n);
            CHECK(w >= prev - 1e-12);
            prev = w;
        }
        CHECK(collision_window(d, 255) == 1.0);
        // Cauchy-Schwarz floor for the same-value term
        CHECK(collision_exact(d, 0) >= 1.0 / static_cast<double>(d.support_size()) - 1e-12);
    }
}

TEST_CASE("collision agrees with Monte-Carlo pair sampling") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<int> support;
        std::vector<double> weights;
        EmpiricalDistribution d;
        double total = 0;
        for (int i = 0; i < 6; ++i) {
            support.push_back(static_cast<int>(rng() % 200));
            weights.push_back(1.0 + static_cast<double>(rng() % 50));
            total += weights.back();
        }
        for (size_t i = 0; i < support.size(); ++i) d.p[support[i]] += weights[i] / total;

        std::discrete_distribution<int> sampler(weights.begin(), weights.end());
        const unsigned n = 1 + trial;
        const int draws = 400000;
        int exact_hits = 0, window_hits = 0;
        for (int i = 0; i < draws; ++i) {
            const int a = support[sampler(rng)];
            const int b = support[sampler(rng)];
            const int diff = std::abs(a - b);
            exact_hits += (diff == 0 || diff == static_cast<int>(n));
            window_hits += diff <= static_cast<int>(n);
        }
        CHECK(collision_exact(d, n) ==
              doctest::Approx(double(exact_hits) / draws).epsilon(0.02));
        CHECK(collision_window(d, n) ==
              doctest::Approx(double(window_hits) / draws).epsilon(0.02));
    }
}

TEST_CASE("flow collision") {
    CHECK(flow_collision(1).probability == 0.0);
    CHECK(flow_collision(100).probability == doctest::Approx(0.073).epsilon(0.01));
    CHECK(flow_collision(1000).probability == doctest::Approx(0.9995).epsilon(0.0002));

    auto saturated = flow_collision(65001);
    CHECK(saturated.probability == 1.0);
    CHECK(saturated.saturated);

    // strictly increasing, and matching the direct product form
    double prev = -1.0;
    for (uint64_t n : {2, 10, 100, 500, 1000, 5000}) {
        const double p = flow_collision(n).probability;
        CHECK(p > prev);
        prev = p;
        double prod = 1.0;
        for (uint64_t i = 1; i < n; ++i) prod *= 1.0 - double(i) / 65000.0;
        CHECK(p == doctest::Approx(1.0 - prod).epsilon(1e-12));
    }
}

TEST_CASE("top_k ordering and tie-break") {
    auto point = from_mass({{100, 1.0}});
    CHECK(top_k(point, 3).size() == 1);

    auto tie = from_mass({{1, 0.5}, {2, 0.5}});
    auto top = top_k(tie, 1);
    REQUIRE(top.size() == 1);
    CHECK(top[0].value == 1);  // ascending value breaks the tie

    auto mixed = from_mass({{5, 0.2}, {9, 0.5}, {40, 0.3}});
    auto ranked = top_k(mixed, 3);
    CHECK(ranked[0].value == 9);
    CHECK(ranked[1].value == 40);
    CHECK(ranked[2].value == 5);
}
