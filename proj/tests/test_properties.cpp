// Randomized property checks over parameters and seeds.
#include <doctest.h>

#include <cmath>
#include <random>

#include "markedtime/cli/commands.hpp"
#include "markedtime/estimator.hpp"
#include "markedtime/hybrid_model.hpp"
#include "markedtime/lab/checks.hpp"
#include "markedtime/lab/suite.hpp"
#include "markedtime/model_checks.hpp"

using namespace markedtime;

TEST_CASE("summary is shift equivariant") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(1 + rng() % 500), y;
        for (auto& v : x) v = z(rng);
        const double c = z(rng) * 10;
        for (double v : x) y.push_back(v + c);
        const auto a = summarize(x, 0), b = summarize(y, 0);
        CHECK(b.mean == doctest::Approx(a.mean + c).epsilon(1e-12));
        CHECK(b.se == doctest::Approx(a.se).epsilon(1e-9));
    }
}

TEST_CASE("pairwise sum is close to a compensated sum") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(rng() % 5000);
        long double exact = 0;
        for (auto& v : x) exact += (v = u(rng));
        CHECK(std::abs(pairwise_sum(x) - static_cast<double>(exact)) < 1e-12 * (1 + x.size()));
    }
}

TEST_CASE("density normalizes at random states and markets") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 25; ++trial) {
        MarketSpec s;
        s.sigma = 0.2 + 2 * u(rng);
        s.lambda = 0.2 + 3 * u(rng);
        s.T_prime = 1.1 + 2 * u(rng);
        const int n = static_cast<int>(rng() % 5);
        const DriverState st{u(rng) * s.T_prime * 0.95, 2 * u(rng) - 1, n, n};
        CHECK(std::abs(density_normalization(s, st) - 1.0) < 1e-6);
    }
}

TEST_CASE("drift equals the log-density derivatives at random states") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    const double j = std::exp(-1.0) - 1.0;
    for (int trial = 0; trial < 50; ++trial) {
        MarketSpec s;
        s.sigma = 0.3 + u(rng);
        const int n = static_cast<int>(rng() % 3);
        const DriverState st{u(rng) * 1.9, u(rng) - 0.5, n, n};
        const Mark m{0.5 + u(rng), n + 1 + static_cast<int>(rng() % 3)};
        const auto d = info_drift(s, st, m);
        const double h = 1e-5;
        auto up = st, dn = st, jumped = st;
        up.b += h;
        dn.b -= h;
        jumped.n += 1;
        jumped.n_left += 1;
        CHECK(d[0] * s.sigma == doctest::Approx((log_conditional_density(s, up, m) - log_conditional_density(s, dn, m)) /
                                                (2 * h))
                                     .epsilon(1e-5));
        CHECK(1 + d[1] * j ==
              doctest::Approx(std::exp(log_conditional_density(s, jumped, m) - log_conditional_density(s, st, m)))
                  .epsilon(1e-9));
    }
}

TEST_CASE("paired gain identity holds for any seed") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        ExperimentConfig c;
        c.spec.T_prime = 1.4;
        c.n_paths = 150;
        c.n_steps = 1400;
        c.master_seed = seed;
        const auto r = additional_utility(c);
        CHECK(r.gain.mean == r.v_insider.mean - r.v_ordinary.mean);
    }
}

TEST_CASE("barrier default probability increases with the barrier") {
    MarketSpec s;
    double last = 0.0;
    for (double b = 0.05; b < 0.99; b += 0.05) {
        s.barrier = b;
        const double p = cli::barrier_default_probability(s);
        CHECK(p > last);
        CHECK(p < 1.0);
        last = p;
    }
}

TEST_CASE("double lattice agrees with the rational one") {
    using namespace markedtime::lab;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto p = random_model_params(seed, 4, 3);
        LatticeSpace<Rational> r(make_model<Rational>(p));
        LatticeSpace<double> d(make_model<double>(p));
        REQUIRE(r.n_atoms() == d.n_atoms());
        for (int t = 0; t <= r.n(); ++t)
            for (std::size_t i = 0; i < r.n_paths(); ++i)
                for (int x = 0; x < r.marks(); ++x)
                    CHECK(d.density(t, i, x) == doctest::Approx(r.density(t, i, x).get_d()).epsilon(1e-12));
        const auto qr = insider_measure(r);
        const auto qd = insider_measure(d);
        for (std::size_t a = 0; a < qr.size(); ++a) CHECK(qd[a] == doctest::Approx(qr[a].get_d()).epsilon(1e-12));
    }
}

TEST_CASE("random lattice models keep every density positive and unit mean in the mark") {
    using namespace markedtime::lab;
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
        LatticeSpace<Rational> s(make_model<Rational>(random_model_params(seed)));
        for (int t = 0; t <= s.n(); ++t)
            for (std::size_t i = 0; i < s.n_paths(); ++i) {
                Rational total(0);
                for (int x = 0; x < s.marks(); ++x) {
                    CHECK(s.density(t, i, x) > 0);
                    total += s.density(t, i, x) * s.eta(x);
                }
                CHECK(total == 1);
            }
    }
}
