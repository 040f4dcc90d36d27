#include <doctest.h>

#include <cmath>

#include "markedtime/hybrid_model.hpp"
#include "markedtime/model_checks.hpp"

using namespace markedtime;

TEST_CASE("default probes are at least ten and lie before T'") {
    MarketSpec spec;
    const auto p = default_density_probes();
    CHECK(p.size() >= 10);
    for (const auto& q : p) CHECK(q.state.t < spec.T_prime);
}

TEST_CASE("quadrature normalization at every default probe") {
    MarketSpec spec;
    for (const auto& p : default_density_probes()) CHECK(std::abs(density_normalization(spec, p.state) - 1.0) < 1e-6);
}

TEST_CASE("normalization holds for other markets") {
    MarketSpec spec;
    spec.sigma = 2.0;
    spec.lambda = 3.0;
    spec.T_prime = 4.0;
    spec.T = 1.0;
    CHECK(std::abs(density_normalization(spec, {3.5, 1.0, 7, 8}) - 1.0) < 1e-6);
    CHECK(std::abs(density_normalization(spec, {0.1, -0.2, 0, 0}) - 1.0) < 1e-6);
}

TEST_CASE("unit mean of the density by Monte Carlo") {
    MarketSpec spec;
    const auto r = density_unit_mean(spec, 0.75, {0.9, 2}, 50000, 17, 1);
    CHECK(r.se > 0.0);
    CHECK(std::abs(r.mean - 1.0) < 3.5 * r.se);
    const auto z = density_unit_mean(spec, 0.0, {0.9, 2}, 100, 17, 1);
    CHECK(z.mean == 1.0);
    CHECK(z.se == 0.0);
}

TEST_CASE("drift oracle agrees with the formula") {
    MarketSpec spec;
    const DriverState s{0.5, 0.3, 1, 1};
    const Mark m{1.2, 3};
    const auto r = drift_oracle(spec, s, m, 1e-3, 400000, 5, 1);
    const auto f = info_drift(spec, s, m);
    CHECK(r.formula == f);
    CHECK(std::abs(r.m1.mean - f[0]) < 3.5 * r.m1.se);
    CHECK(std::abs(r.m2.mean - f[1]) < 3.5 * r.m2.se);
}

TEST_CASE("drift oracle preconditions") {
    MarketSpec spec;
    CHECK_THROWS(drift_oracle(spec, {0.5, 0.0, 0, 1}, {1.0, 2}, 1e-3, 10, 1, 1));
    CHECK_THROWS(density_normalization(spec, {2.0, 0.0, 0, 0}));
}
