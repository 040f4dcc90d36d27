#include "markedtime/hybrid_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace markedtime {

namespace {

void require_before_mark_horizon(const MarketSpec& spec, double t, const char* where) {
    if (!(t < spec.T_prime))
        throw std::domain_error(std::string(where) + ": t must be < T' (the density is singular at T')");
}

}  // namespace

Mark mark_from_paths(const MarketSpec& spec, const PathBundle& bundle) {
    if (std::abs(bundle.grid.horizon() - spec.T_prime) > 1e-12 * spec.T_prime)
        throw std::invalid_argument("mark_from_paths: bundle must be simulated to T'");
    const double b = bundle.brownian.terminal();
    return {std::exp(spec.sigma * b - 0.5 * spec.sigma * spec.sigma * spec.T_prime), bundle.poisson.terminal()};
}

double log_conditional_density(const MarketSpec& spec, const DriverState& state, const Mark& mark) {
    require_before_mark_horizon(spec, state.t, "conditional_density");
    const int remaining = mark.k - state.n;
    if (remaining < 0) return -kInfinity;

    const double s = spec.sigma;
    const double Tp = spec.T_prime;
    const double left = Tp - state.t;
    const double centred = std::log(mark.x1) + 0.5 * s * s * Tp;
    const double z_t = (centred - s * state.b) / (s * std::sqrt(left));
    const double z_0 = centred / (s * std::sqrt(Tp));
    const double gaussian = 0.5 * std::log(Tp / left) - 0.5 * z_t * z_t + 0.5 * z_0 * z_0;

    const double lam = spec.lambda;
    // grouped so that every bracket is exactly 0 at t = 0
    const double factorials = std::lgamma(mark.k + 1.0) - std::lgamma(remaining + 1.0);
    const double powers = (remaining > 0 ? remaining * std::log(lam * left) : 0.0) -
                          (mark.k > 0 ? mark.k * std::log(lam * Tp) : 0.0);
    return gaussian + (lam * state.t + factorials + powers);
}

double conditional_density(const MarketSpec& spec, const DriverState& state, const Mark& mark) {
    return std::exp(log_conditional_density(spec, state, mark));
}

double mark_law_density(const MarketSpec& spec, const Mark& mark) {
    if (!(mark.x1 > 0.0) || mark.k < 0) return 0.0;
    const double s = spec.sigma;
    const double Tp = spec.T_prime;
    const double sd = s * std::sqrt(Tp);
    const double z = (std::log(mark.x1) + 0.5 * s * s * Tp) / sd;
    const double log_normal = -0.5 * z * z - std::log(mark.x1 * sd) - 0.5 * std::log(2.0 * std::numbers::pi);
    const double mean = spec.lambda * Tp;
    const double log_poisson = mark.k * std::log(mean) - mean - std::lgamma(mark.k + 1.0);
    return std::exp(log_normal + log_poisson);
}

Vec2 info_drift(const MarketSpec& spec, const DriverState& state, const Mark& mark) {
    require_before_mark_horizon(spec, state.t, "info_drift");
    if (mark.k < state.n_left)
        throw std::domain_error("info_drift: mark jump count below N_{t-} (zero density)");
    const double s = spec.sigma;
    const double left = spec.T_prime - state.t;
    const double m1 = (std::log(mark.x1) + 0.5 * s * s * spec.T_prime - s * state.b) / (s * s * left);
    const double m2 = ((mark.k - state.n_left) / (spec.lambda * left) - 1.0) / kJumpSize;
    return {m1, m2};
}

Vec2 market_alpha(const MarketSpec&) { return {0.0, std::exp(-1.0) / (kJumpSize * kJumpSize)}; }

Bracket2 bracket(const MarketSpec& spec, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("bracket: t must be >= 0");
    return {spec.sigma * spec.sigma * t, kJumpSize * kJumpSize * spec.lambda * t};
}

Bracket2 bracket_stopped(const MarketSpec& spec, double t, double tau) {
    if (!(t >= 0.0)) throw std::invalid_argument("bracket_stopped: t must be >= 0");
    return bracket(spec, t > tau ? t - tau : 0.0);
}

std::vector<Vec2> asset_relative_increments(const MarketSpec& spec, const PathBundle& bundle) {
    const auto& path = bundle.trading;
    std::vector<Vec2> out;
    if (path.size() < 2) return out;
    out.reserve(path.size() - 1);
    const double s = spec.sigma;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const double dt = path.t[i + 1] - path.t[i];
        const double dB = path.b[i + 1] - path.b[i];
        const int dN = path.n[i + 1] - path.n[i];
        out.push_back({std::expm1(s * dB - 0.5 * s * s * dt), std::expm1(spec.lambda * dt - dN)});
    }
    return out;
}

std::vector<Vec2> asset_values(const MarketSpec& spec, const PathBundle& bundle) {
    const auto& path = bundle.trading;
    std::vector<Vec2> out(path.size());
    const double s = spec.sigma;
    for (std::size_t i = 0; i < path.size(); ++i)
        out[i] = {std::exp(s * path.b[i] - 0.5 * s * s * path.t[i]), std::exp(spec.lambda * path.t[i] - path.n[i])};
    return out;
}

PathBundle simulate_scenario(const MarketSpec& spec, int n_steps, std::uint64_t master_seed,
                             std::uint64_t path_index, bool bridge_correction) {
    PathBundle bundle = simulate_bundle(spec, n_steps, master_seed, path_index, bridge_correction);
    bundle.mark = mark_from_paths(spec, bundle);
    return bundle;
}

}  // namespace markedtime
