#include <doctest.h>

#include <cmath>

#include "markedtime/estimator.hpp"

using namespace markedtime;

namespace {
ExperimentConfig small(int paths = 1000, int steps = 1500) {
    ExperimentConfig c;
    c.spec.T_prime = 1.5;  // lambda T' < 1/(1 - e^{-1}): the insider stays admissible
    c.n_paths = paths;
    c.n_steps = steps;
    c.master_seed = 99;
    return c;
}
}  // namespace

TEST_CASE("pairwise sum and summary") {
    std::vector<double> v(1000, 0.1);
    CHECK(pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
    std::vector<double> c(777, 0.3);
    const auto s = summarize(c, 5);
    CHECK(s.mean == 0.3);
    CHECK(s.se == 0.0);
    CHECK(s.seed == 5);
    std::vector<double> x{1, 2, 3, 4};
    const auto t = summarize(x, 0);
    CHECK(t.mean == 2.5);
    CHECK(t.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("closed-form candidates") {
    MarketSpec spec;
    const auto vf = closed_form_VF(spec);
    CHECK(find_label(vf, "theorem").value == doctest::Approx(0.16934844).epsilon(1e-7));
    CHECK(find_label(vf, "printed").value == doctest::Approx(0.23016840).epsilon(1e-7));
    CHECK(jump_exact_VF(spec) == doctest::Approx(0.04845547).epsilon(1e-6));
    CHECK(prefactor_sigma(spec) == 3.0);
    CHECK(gain_log_term(spec, kInfinity) == doctest::Approx(0.0));
    CHECK(gain_log_term(spec, 0.0) == doctest::Approx(std::log(2.0)));
    spec.x0 = std::exp(1.0);
    CHECK(find_label(closed_form_VF(spec), "theorem").value == doctest::Approx(1.16934844).epsilon(1e-7));
}

TEST_CASE("results do not depend on the worker count") {
    auto c = small(600, 300);
    c.workers = 1;
    const auto a = estimate_expected_log_utility(ordinary_strategy(c.spec), c);
    c.workers = 3;
    const auto b = estimate_expected_log_utility(ordinary_strategy(c.spec), c);
    CHECK(a.mean == b.mean);
    CHECK(a.se == b.se);
    CHECK(a.seed == 99);
}

TEST_CASE("paired comparison identities") {
    const auto c = small();
    const auto r = additional_utility(c);
    CHECK(r.gain.mean == r.v_insider.mean - r.v_ordinary.mean);
    CHECK(r.gain.se > 0.0);
    CHECK(r.gain.se < std::hypot(r.v_ordinary.se, r.v_insider.se));
    CHECK(!r.triage_degenerate);
    CHECK(r.closed_form_candidates.size() == 4);
    CHECK(r.z_scores.size() == 4);
    // the insider gains: the CI excludes zero
    CHECK(r.gain.mean - 3 * r.gain.se > 0.0);

    auto nc = c;
    nc.crn = false;
    const auto u = additional_utility(nc);
    CHECK(u.v_ordinary.mean == r.v_ordinary.mean);
    CHECK(u.gain.se == doctest::Approx(std::hypot(u.v_ordinary.se, u.v_insider.se)));
}

TEST_CASE("sigma = 1 is flagged as degenerate") {
    auto c = small(200, 1500);
    c.spec.sigma = 1.0;
    CHECK(additional_utility(c).triage_degenerate);
}

TEST_CASE("the insider aborts at the default horizon") {
    // lambda T' = 2 exceeds 1/(1 - e^{-1}): a late jump after an early default
    // drives 1 + pi2 j below zero
    ExperimentConfig c;
    c.n_paths = 3000;
    c.n_steps = 400;
    CHECK_THROWS_AS(additional_utility(c), AdmissibilityViolation);
}

TEST_CASE("gain Monte Carlo over tau only matches the comparison's log term") {
    const auto c = small(300, 1500);
    const auto g = closed_form_gain(c.spec, c);
    const auto r = additional_utility(c);
    CHECK(g.e_log_term.mean == r.e_log_term.mean);
    CHECK(g.candidate_unit == doctest::Approx(2 * g.e_log_term.mean));
}

TEST_CASE("invalid configs are rejected with every problem") {
    ExperimentConfig c;
    c.n_paths = 0;
    c.n_steps = 0;
    c.spec.sigma = -1;
    CHECK(c.problems().size() == 3);
    CHECK_THROWS_AS(c.validate(), ValidationError);
}
