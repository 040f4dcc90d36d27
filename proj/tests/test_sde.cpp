#include <doctest.h>

#include <cmath>

#include "markedtime/cli/commands.hpp"
#include "markedtime/sde.hpp"

using namespace markedtime;

TEST_CASE("brownian increments have variance dt") {
    TimeGrid grid(1.0, 50);
    double s2 = 0.0;
    const int paths = 4000;
    for (int p = 0; p < paths; ++p) {
        RngStream r(11, p);
        auto b = simulate_brownian(grid, r);
        CHECK(b.values.front() == 0.0);
        CHECK(b.values.size() == 51);
        s2 += b.terminal() * b.terminal();
    }
    CHECK(std::abs(s2 / paths - 1.0) < 5.0 * std::sqrt(2.0 / paths));
}

TEST_CASE("poisson counts match the jump times") {
    TimeGrid grid(2.0, 20);
    RngStream r(3, 1, Substream::poisson);
    auto p = simulate_poisson(grid, 3.0, r);
    for (int k = 0; k <= 20; ++k) CHECK(p.counts[k] == p.count_at(grid.node(k)));
    for (double t : p.jump_times) {
        CHECK(p.count_at(t) == p.count_before(t) + 1);
        CHECK(t <= 2.0);
    }
}

TEST_CASE("poisson mean count") {
    TimeGrid grid(2.0, 4);
    double total = 0.0;
    const int paths = 20000;
    for (int i = 0; i < paths; ++i) {
        RngStream r(5, i, Substream::poisson);
        total += simulate_poisson(grid, 1.5, r).terminal();
    }
    CHECK(std::abs(total / paths - 3.0) < 5.0 * std::sqrt(3.0 / paths));
}

TEST_CASE("bridge-corrected hitting matches the first-passage law on a coarse grid") {
    MarketSpec spec;
    const double exact = cli::barrier_default_probability(spec);
    const int paths = 40000;
    double hit_bridge = 0.0, hit_plain = 0.0;
    for (int i = 0; i < paths; ++i) {
        auto with = simulate_bundle(spec, 20, 77, i, true);
        auto without = simulate_bundle(spec, 20, 77, i, false);
        hit_bridge += with.tau1 <= spec.T;
        hit_plain += without.tau1 <= spec.T;
    }
    const double se = std::sqrt(exact * (1 - exact) / paths);
    CHECK(std::abs(hit_bridge / paths - exact) < 4.0 * se);
    // the node-only rule misses crossings between nodes
    CHECK(hit_plain / paths < exact - 4.0 * se);
}

TEST_CASE("bundle is a pure function of (seed, path)") {
    MarketSpec spec;
    auto a = simulate_bundle(spec, 100, 9, 12, true);
    auto b = simulate_bundle(spec, 100, 9, 12, true);
    CHECK(a.brownian.values == b.brownian.values);
    CHECK(a.poisson.jump_times == b.poisson.jump_times);
    CHECK(a.tau == b.tau);
    CHECK(a.trading.t == b.trading.t);
}

TEST_CASE("trading nodes contain T and every jump before T") {
    MarketSpec spec;
    for (int i = 0; i < 50; ++i) {
        auto b = simulate_bundle(spec, 37, 4, i, true);
        CHECK(b.trading.t.front() == 0.0);
        CHECK(b.trading.t.back() == spec.T);
        for (std::size_t k = 1; k < b.trading.size(); ++k) CHECK(b.trading.t[k] > b.trading.t[k - 1]);
        for (double s : b.poisson.jump_times)
            if (s <= spec.T) CHECK(std::find(b.trading.t.begin(), b.trading.t.end(), s) != b.trading.t.end());
        CHECK(b.tau == std::min(b.tau1, b.tau2));
        CHECK(b.tau2 == first_jump_time(b.poisson));
    }
}
