#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "markedtime/rng.hpp"

using namespace markedtime;

TEST_CASE("philox known answers") {
    // Random123 kat_vectors for philox4x32_10
    auto a = Philox4x32::apply({0, 0, 0, 0}, {0, 0});
    CHECK(a == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    auto b = Philox4x32::apply({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(b == Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    auto c = Philox4x32::apply({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    CHECK(c == Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and order independent") {
    RngStream a(42, 7), b(42, 7);
    std::vector<double> xa, xb;
    for (int i = 0; i < 100; ++i) xa.push_back(a.uniform());
    for (int i = 0; i < 100; ++i) xb.push_back(b.uniform());
    CHECK(xa == xb);
    // random access reproduces the sequential draws
    RngStream c(42, 7);
    for (int i = 0; i < 10; ++i) CHECK(c.uniform_at(i) == xa[i]);
    RngStream d(42, 7, Substream::bridge);
    const RngStream e = d;
    for (int i = 0; i < 9; ++i) CHECK(e.normal_at(i) == d.normal());
}

TEST_CASE("substreams and paths differ") {
    RngStream a(1, 0), b(1, 1);
    auto s = a.substream(Substream::poisson);
    std::set<double> seen;
    for (int i = 0; i < 50; ++i) {
        seen.insert(a.uniform());
        seen.insert(b.uniform());
        seen.insert(s.uniform());
    }
    CHECK(seen.size() == 150);
}

TEST_CASE("uniforms lie in the open unit interval") {
    CHECK(bits_to_open_unit(0) > 0.0);
    CHECK(bits_to_open_unit(~0ull) < 1.0);
}

TEST_CASE("moments of normal and exponential draws") {
    RngStream r(2024, 3);
    const int n = 200000;
    double s = 0, s2 = 0, e = 0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
        e += r.exponential(2.0);
    }
    CHECK(std::abs(s / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(s2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(e / n - 0.5) < 5.0 * 0.5 / std::sqrt(n));
}

TEST_CASE("mix_seed separates salts") {
    CHECK(mix_seed(1, 0) != mix_seed(1, 1));
    CHECK(mix_seed(1, 0) != mix_seed(2, 0));
    CHECK(mix_seed(5, 9) == mix_seed(5, 9));
}
