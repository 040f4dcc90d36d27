#include <doctest.h>

#include "markedtime/market.hpp"

using namespace markedtime;

TEST_CASE("default market is valid") { CHECK(MarketSpec{}.problems().empty()); }

TEST_CASE("every problem is reported at once") {
    MarketSpec s;
    s.sigma = 0.0;
    s.lambda = -1.0;
    s.barrier = 1.5;
    s.T = 2.0;  // not before T'
    const auto p = s.problems();
    CHECK(p.size() >= 4);
    try {
        s.validate();
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.problems() == p);
    }
}

TEST_CASE("time grid ends exactly at the horizon") {
    TimeGrid g(2.0, 3);
    CHECK(g.node(0) == 0.0);
    CHECK(g.node(3) == 2.0);
    CHECK(g.dt() == doctest::Approx(2.0 / 3));
    TimeGrid empty(1.0, 0);
    CHECK(empty.node(0) == 0.0);
}

TEST_CASE("mark keeps the jump count exactly") {
    MarketSpec s;
    Mark m{1.2, 3};
    CHECK(m.log_x2(s) == s.lambda * s.T_prime - 3);
}
