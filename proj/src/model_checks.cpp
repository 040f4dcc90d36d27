#include "markedtime/model_checks.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "markedtime/hybrid_model.hpp"
#include "markedtime/rng.hpp"

namespace markedtime {

std::vector<DensityProbe> default_density_probes() {
    return {
        {{0.0, 0.0, 0, 0}, {1.0, 0}},
        {{0.0, 0.0, 0, 0}, {0.7, 3}},
        {{0.25, 0.1, 0, 0}, {1.05, 1}},
        {{0.5, -0.4, 1, 1}, {0.8, 2}},
        {{0.5, 0.3, 0, 0}, {1.2, 0}},
        {{0.75, 0.0, 2, 2}, {0.9, 4}},
        {{1.0, 0.3, 0, 0}, {std::exp(0.1), 0}},
        {{1.0, -1.0, 1, 1}, {0.6, 1}},
        {{1.0, 0.8, 3, 3}, {1.5, 5}},
        {{1.5, 0.2, 1, 1}, {1.1, 2}},
        {{1.9, -0.5, 2, 2}, {0.75, 3}},
        {{0.3, 0.0, 0, 0}, {2.0, 8}},
    };
}

double density_normalization(const MarketSpec& spec, const DriverState& state) {
    if (!(state.t < spec.T_prime)) throw std::domain_error("density_normalization: t must be < T'");
    const double s = spec.sigma;
    const double centre = s * state.b - 0.5 * s * s * spec.T_prime;  // conditional mean of ln x1
    const double sd = s * std::sqrt(spec.T_prime - state.t);
    const double width = 14.0 * sd;
    const double remaining_mean = spec.lambda * (spec.T_prime - state.t);
    const int k_max = state.n + static_cast<int>(remaining_mean + 15.0 * std::sqrt(remaining_mean) + 40.0);

    double total = 0.0;
    for (int k = state.n; k <= k_max; ++k) {
        auto integrand = [&](double y) {
            const Mark mark{std::exp(y), k};
            return conditional_density(spec, state, mark) * mark_law_density(spec, mark) * mark.x1;
        };
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, centre - width,
                                                                               centre + width, 15, 1e-13);
    }
    return total;
}

namespace {

int poisson_inverse(double u, double mean) {
    double p = std::exp(-mean);
    double cdf = p;
    int k = 0;
    while (u > cdf && k < 100000) {
        ++k;
        p *= mean / k;
        cdf += p;
        if (p == 0.0 && cdf < u) break;
    }
    return k;
}

}  // namespace

EstimateCI density_unit_mean(const MarketSpec& spec, double t, const Mark& mark, std::int64_t n_samples,
                             std::uint64_t seed, int workers) {
    if (!(t >= 0.0 && t < spec.T_prime)) throw std::domain_error("density_unit_mean: t must lie in [0, T')");
    if (n_samples < 1) throw std::invalid_argument("density_unit_mean: n_samples must be >= 1");
    std::vector<double> values(n_samples);
    parallel_for(n_samples, workers, [&](std::int64_t i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i), Substream::probe);
        const double b = std::sqrt(t) * rng.normal();
        const int n = poisson_inverse(rng.uniform(), spec.lambda * t);
        values[i] = conditional_density(spec, {t, b, n, n}, mark);
    });
    return summarize(values, seed);
}

DriftOracle drift_oracle(const MarketSpec& spec, const DriverState& state, const Mark& mark, double h,
                         std::int64_t n_samples, std::uint64_t seed, int workers) {
    if (state.n_left != state.n) throw std::invalid_argument("drift_oracle: probe state must have no jump at t");
    if (!(h > 0.0 && state.t + h < spec.T_prime)) throw std::invalid_argument("drift_oracle: need 0 < h < T' - t");
    if (n_samples < 1) throw std::invalid_argument("drift_oracle: n_samples must be >= 1");
    const double log_p = log_conditional_density(spec, state, mark);
    if (!std::isfinite(log_p)) throw std::invalid_argument("drift_oracle: density vanishes at the probe");

    const double s = spec.sigma;
    const double j = kJumpSize;
    std::vector<double> x1(n_samples), x2(n_samples);
    parallel_for(n_samples, workers, [&](std::int64_t i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i), Substream::probe);
        const double dB = std::sqrt(h) * rng.normal();
        const int dN = poisson_inverse(rng.uniform(), spec.lambda * h);
        const DriverState next{state.t + h, state.b + dB, state.n + dN, state.n + dN};
        const double ratio = std::exp(log_conditional_density(spec, next, mark) - log_p);
        x1[i] = (ratio - 1.0) * s * dB / (s * s * h);
        x2[i] = (ratio - 1.0) * j * (dN - spec.lambda * h) / (j * j * spec.lambda * h);
    });
    DriftOracle out;
    out.formula = info_drift(spec, state, mark);
    out.m1 = summarize(x1, seed);
    out.m2 = summarize(x2, seed);
    return out;
}

}  // namespace markedtime
