#include "divbar/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

using namespace divbar;

TEST_CASE("philox4x32_10 matches published test vectors", "[rng]") {
    {
        const auto out = philox4x32_10({0u, 0u, 0u, 0u}, {0u, 0u});
        REQUIRE(out == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du,
                                                    0xbc57ac4cu, 0x9b00dbd8u});
    }
    {
        const auto out = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                       {0xffffffffu, 0xffffffffu});
        REQUIRE(out == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu,
                                                    0xa20bc7c6u, 0x6d5451fdu});
    }
    {
        const auto out = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                       {0xa4093822u, 0x299f31d0u});
        REQUIRE(out == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu,
                                                    0x5001e420u, 0x24126ea1u});
    }
}

TEST_CASE("streams are reproducible and distinct per path", "[rng]") {
    PhiloxStream a(12345u, 7u);
    PhiloxStream b(12345u, 7u);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

    PhiloxStream c(12345u, 8u);
    PhiloxStream d(54321u, 7u);
    PhiloxStream e(12345u, 7u);
    int same_c = 0, same_d = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto r = e.next_u64();
        if (c.next_u64() == r) ++same_c;
        if (d.next_u64() == r) ++same_d;
    }
    REQUIRE(same_c == 0);
    REQUIRE(same_d == 0);
}

TEST_CASE("uniforms live strictly inside the unit interval", "[rng]") {
    PhiloxStream s(2024u, 0u);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = s.next_uniform();
        REQUIRE(x > 0.0);
        REQUIRE(x < 1.0);
        sum += x;
    }
    // mean 0.5, sd of the mean = 1/sqrt(12 n)
    REQUIRE(std::abs(sum / n - 0.5) < 5.0 / std::sqrt(12.0 * n));
}

TEST_CASE("ziggurat normals have the right moments and tails", "[rng]") {
    PhiloxStream s(99u, 3u);
    const int n = 2000000;
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
    long tail3 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = sample_normal(s);
        m1 += z;
        m2 += z * z;
        m3 += z * z * z;
        m4 += z * z * z * z;
        if (std::abs(z) > 3.0) ++tail3;
    }
    m1 /= n;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    REQUIRE(std::abs(m1) < 5.0 / std::sqrt(double(n)));
    REQUIRE(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
    REQUIRE(std::abs(m3) < 5.0 * std::sqrt(15.0 / n));
    REQUIRE(std::abs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));

    // P(|Z| > 3) = 0.002699796063...
    const double p = 0.002699796063260207;
    const double se = std::sqrt(p * (1.0 - p) / n);
    REQUIRE(std::abs(double(tail3) / n - p) < 5.0 * se);
}

TEST_CASE("ziggurat output passes a one-sample KS check", "[rng]") {
    PhiloxStream s(7u, 11u);
    const int n = 200000;
    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) {
        const double z = sample_normal(s);
        u[i] = 0.5 * std::erfc(-z / std::sqrt(2.0));
    }
    std::sort(u.begin(), u.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        const double lo = double(i) / n;
        const double hi = double(i + 1) / n;
        d = std::max(d, std::max(u[i] - lo, hi - u[i]));
    }
    // K-S critical value at the 0.1% level is about 1.95/sqrt(n)
    REQUIRE(d * std::sqrt(double(n)) < 1.95);
}
