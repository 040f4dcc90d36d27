#pragma once

#include <cstdint>
#include <vector>

#include "markedtime/market.hpp"
#include "markedtime/sde.hpp"

namespace markedtime {

/// G = (S1_{T'}, S2_{T'}) read off a bundle simulated to T'.
Mark mark_from_paths(const MarketSpec& spec, const PathBundle& bundle);

/// Conditional density p_t(x) of the mark given the noises up to t, relative
/// to the mark's unconditional law. Computed in log space; zero when
/// N_t exceeds the mark's jump count. Throws std::domain_error for t >= T'.
double conditional_density(const MarketSpec& spec, const DriverState& state, const Mark& mark);

/// log p_t(x); -inf where the density vanishes.
double log_conditional_density(const MarketSpec& spec, const DriverState& state, const Mark& mark);

/// Unconditional law of the mark: lognormal density of x1 (ln x1 ~
/// N(-sigma^2 T'/2, sigma^2 T')) times the Poisson(lambda T') mass at k.
double mark_law_density(const MarketSpec& spec, const Mark& mark);

/// Information drift (m1, m2). m2 reads N_{t-} (state.n_left), so a jump at
/// t itself does not move it. Throws std::domain_error for t >= T' or when the
/// mark is incompatible with the state (k < N_{t-}).
Vec2 info_drift(const MarketSpec& spec, const DriverState& state, const Mark& mark);

/// Market price of risk: (0, e^{-1} / (e^{-1} - 1)^2), constant in time.
Vec2 market_alpha(const MarketSpec& spec);

/// <M>_t = diag(sigma^2 t, (e^{-1}-1)^2 lambda t).
Bracket2 bracket(const MarketSpec& spec, double t);

/// Bracket of the post-default part M - M^tau: <M>_{(t - tau)^+}.
Bracket2 bracket_stopped(const MarketSpec& spec, double t, double tau);

/// Per-step relative price changes (dX1/X1-, dX2/X2-) along the trading
/// nodes, by exact exponential stepping. Both components are > -1.
std::vector<Vec2> asset_relative_increments(const MarketSpec& spec, const PathBundle& bundle);

/// Asset values (S1, S2) along the trading nodes from the closed forms.
std::vector<Vec2> asset_values(const MarketSpec& spec, const PathBundle& bundle);

/// simulate_bundle plus the mark.
PathBundle simulate_scenario(const MarketSpec& spec, int n_steps, std::uint64_t master_seed,
                             std::uint64_t path_index, bool bridge_correction);

}  // namespace markedtime
