#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "markedtime/market.hpp"
#include "markedtime/rng.hpp"

namespace markedtime {

/// Brownian motion sampled on a TimeGrid. values[0] == 0 and values are the
/// prefix sums of increments.
struct BrownianPath {
    std::vector<double> values;
    std::vector<double> increments;

    double terminal() const { return values.back(); }
};

/// Poisson path on [0, horizon] with exact jump times.
struct PoissonPath {
    double horizon = 0.0;
    std::vector<double> jump_times;  // sorted, in (0, horizon]
    std::vector<int> counts;         // N at each grid node

    /// N_t = #{jumps <= t}.
    int count_at(double t) const;
    /// N_{t-} = #{jumps < t}.
    int count_before(double t) const;
    int terminal() const { return static_cast<int>(jump_times.size()); }
};

/// Nodes of the trading interval [0, T]: the base grid nodes below T, T itself,
/// every jump time <= T and tau1 when it falls strictly inside a step.
struct TradingPath {
    std::vector<double> t;
    std::vector<double> b;  // B at each node
    std::vector<int> n;     // N at each node, a jump at the node included

    std::size_t size() const { return t.size(); }
};

/// One simulated scenario of the hybrid market.
struct PathBundle {
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    TimeGrid grid{0.0, 0};
    BrownianPath brownian;
    PoissonPath poisson;
    double tau1 = kInfinity;
    double tau2 = kInfinity;
    double tau = kInfinity;
    /// Set by simulate_scenario (hybrid model).
    std::optional<Mark> mark;
    TradingPath trading;
};

struct HittingOptions {
    bool bridge_correction = true;
    /// Source of the per-step crossing uniforms; required for the bridge test.
    const RngStream* crossing = nullptr;
};

BrownianPath simulate_brownian(const TimeGrid& grid, RngStream& stream);

/// Exact exponential inter-arrivals on [0, grid.horizon()]; the grid is only
/// used to read off counts.
PoissonPath simulate_poisson(const TimeGrid& grid, double intensity, RngStream& stream);

/// First time S1 = exp(sigma B - sigma^2 t/2) is at or below the barrier.
///
/// Grid nodes are checked directly. With bridge correction each step whose
/// endpoints both lie above the barrier is crossed with probability
/// exp(-2 d1 d2 / (sigma^2 dt)), d1, d2 the log-distances of the endpoints to
/// the barrier. A crossing inside a step is placed by linear interpolation of
/// the log-distance (O(dt) placement error); without the bridge the detected
/// time is the first node at or below the barrier. Returns +inf if no hit by
/// the grid horizon.
double first_hitting_time(const MarketSpec& spec, const BrownianPath& path, const TimeGrid& grid,
                          const HittingOptions& options);

/// First jump time (exact), +inf when the path has no jump.
double first_jump_time(const PoissonPath& path);

/// Builds the trading nodes on [0, horizon]. B at an inserted jump time (or
/// at a horizon that is not a grid node) is drawn from the Brownian bridge
/// between its known neighbours; B at an inserted tau1 is pinned to the
/// barrier level.
TradingPath refine_trading_nodes(const MarketSpec& spec, const BrownianPath& brownian,
                                 const PoissonPath& poisson, const TimeGrid& grid, double tau1,
                                 double horizon, const RngStream& bridge);

/// Simulates the driving noises and default times of path `path_index` on
/// a grid over [0, T'] with `n_steps` steps. The mark is left empty.
PathBundle simulate_bundle(const MarketSpec& spec, int n_steps, std::uint64_t master_seed,
                           std::uint64_t path_index, bool bridge_correction);

}  // namespace markedtime
