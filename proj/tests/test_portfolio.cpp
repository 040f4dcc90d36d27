#include <doctest.h>

#include <cmath>

#include "markedtime/hybrid_model.hpp"
#include "markedtime/portfolio.hpp"

using namespace markedtime;

TEST_CASE("zero allocation keeps wealth at x0") {
    MarketSpec spec;
    spec.x0 = 2.5;
    auto b = simulate_scenario(spec, 100, 1, 0, true);
    const auto inc = asset_relative_increments(spec, b);
    const auto w = wealth_path(spec.x0, constant_strategy({0.0, 0.0}), b, inc);
    for (double v : w.values) CHECK(v == 2.5);
    CHECK(log_utility(w) == doctest::Approx(std::log(2.5)));
}

TEST_CASE("fully invested in one asset tracks its price") {
    MarketSpec spec;
    auto b = simulate_scenario(spec, 200, 2, 5, true);
    const auto inc = asset_relative_increments(spec, b);
    const auto v = asset_values(spec, b);
    const auto w1 = wealth_path(1.0, constant_strategy({1.0, 0.0}), b, inc);
    const auto w2 = wealth_path(1.0, constant_strategy({0.0, 1.0}), b, inc);
    CHECK(w1.values.back() == doctest::Approx(v.back()[0]).epsilon(1e-9));
    CHECK(w2.values.back() == doctest::Approx(v.back()[1]).epsilon(1e-9));
    double lt = 0.0;
    CHECK(log_terminal_wealth(1.0, constant_strategy({1.0, 0.0}), b, inc, lt).admissible);
    CHECK(lt == doctest::Approx(std::log(w1.values.back())));
}

TEST_CASE("ordinary and insider agree before default") {
    MarketSpec spec;
    const auto ord = ordinary_strategy(spec);
    const auto ins = insider_strategy(spec);
    const Mark mark{1.1, 2};
    const DriverState s{0.3, 0.1, 0, 0};
    CHECK(ord.allocation(s, 0.5, mark) == ins.allocation(s, 0.5, mark));
    const auto after = ins.allocation({0.6, 0.2, 1, 1}, 0.5, mark);
    const auto expected = market_alpha(spec) + info_drift(spec, {0.6, 0.2, 1, 1}, mark);
    CHECK(after == expected);
    CHECK(ord.allocation({0.6, 0.2, 1, 1}, 0.5, mark) == market_alpha(spec));
}

TEST_CASE("shifted strategy adds the shifts in the right regime") {
    MarketSpec spec;
    const auto s = shifted_strategy(ordinary_strategy(spec), {0.1, 0.0}, {0.0, -0.2});
    const auto a = market_alpha(spec);
    const auto pre = s.allocation({0.1, 0.0, 0, 0}, 0.5, Mark{});
    const auto post = s.allocation({0.7, 0.0, 0, 0}, 0.5, Mark{});
    CHECK(pre[0] == doctest::Approx(a[0] + 0.1));
    CHECK(post[1] == doctest::Approx(a[1] - 0.2));
}

TEST_CASE("a leveraged jump allocation is inadmissible") {
    MarketSpec spec;
    spec.lambda = 5.0;  // jumps before T are near certain
    bool thrown = false;
    for (int i = 0; i < 20 && !thrown; ++i) {
        auto b = simulate_scenario(spec, 100, 1, i, true);
        if (b.poisson.count_at(spec.T) == 0) continue;
        const auto inc = asset_relative_increments(spec, b);
        try {
            wealth_path(1.0, constant_strategy({0.0, 2.0}), b, inc);  // 1 + 2 j < 0
        } catch (const AdmissibilityViolation& e) {
            thrown = true;
            CHECK(!e.report().admissible);
            CHECK(e.report().violating_inner_product <= -1.0);
        }
    }
    CHECK(thrown);
}
