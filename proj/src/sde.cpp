#include "markedtime/sde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace markedtime {

int PoissonPath::count_at(double t) const {
    return static_cast<int>(std::upper_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin());
}

int PoissonPath::count_before(double t) const {
    return static_cast<int>(std::lower_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin());
}

BrownianPath simulate_brownian(const TimeGrid& grid, RngStream& stream) {
    const int n = grid.n_steps();
    const double scale = std::sqrt(grid.dt());
    BrownianPath path;
    path.values.resize(n + 1);
    path.increments.resize(n);
    path.values[0] = 0.0;
    for (int k = 0; k < n; ++k) {
        const double dB = scale * stream.normal();
        path.increments[k] = dB;
        path.values[k + 1] = path.values[k] + dB;
    }
    return path;
}

PoissonPath simulate_poisson(const TimeGrid& grid, double intensity, RngStream& stream) {
    if (!(intensity >= 0.0)) throw std::invalid_argument("simulate_poisson: intensity must be >= 0");
    PoissonPath path;
    path.horizon = grid.horizon();
    if (intensity > 0.0) {
        double t = stream.exponential(intensity);
        while (t <= path.horizon) {
            path.jump_times.push_back(t);
            t += stream.exponential(intensity);
        }
    }
    path.counts.resize(grid.n_steps() + 1);
    std::size_t next = 0;
    for (int k = 0; k <= grid.n_steps(); ++k) {
        const double node = grid.node(k);
        while (next < path.jump_times.size() && path.jump_times[next] <= node) ++next;
        path.counts[k] = static_cast<int>(next);
    }
    return path;
}

double first_hitting_time(const MarketSpec& spec, const BrownianPath& path, const TimeGrid& grid,
                          const HittingOptions& options) {
    if (!(spec.barrier > 0.0 && spec.barrier < 1.0))
        throw std::invalid_argument("first_hitting_time: barrier must lie in (0, 1), below S1_0 = 1");
    if (options.bridge_correction && options.crossing == nullptr)
        throw std::invalid_argument("first_hitting_time: bridge correction needs a crossing stream");

    const double log_barrier = std::log(spec.barrier);
    const double sigma = spec.sigma;
    const double dt = grid.dt();
    const double variance = sigma * sigma * dt;
    auto distance = [&](int k) {
        return sigma * path.values[k] - 0.5 * sigma * sigma * grid.node(k) - log_barrier;
    };

    double left = distance(0);
    for (int k = 0; k < grid.n_steps(); ++k) {
        const double right = distance(k + 1);
        if (right <= 0.0) {
            if (!options.bridge_correction) return grid.node(k + 1);
            return std::min(grid.node(k) + dt * left / (left - right), grid.node(k + 1));
        }
        if (options.bridge_correction) {
            const double exponent = 2.0 * left * right / variance;
            if (exponent < 745.0 && options.crossing->uniform_at(static_cast<std::uint64_t>(k)) < std::exp(-exponent))
                return grid.node(k) + dt * left / (left + right);
        }
        left = right;
    }
    return kInfinity;
}

double first_jump_time(const PoissonPath& path) {
    return path.jump_times.empty() ? kInfinity : path.jump_times.front();
}

namespace {

struct NodePoint {
    double t;
    bool known;
    double b;
};

}  // namespace

TradingPath refine_trading_nodes(const MarketSpec& spec, const BrownianPath& brownian,
                                 const PoissonPath& poisson, const TimeGrid& grid, double tau1,
                                 double horizon, const RngStream& bridge) {
    if (horizon > grid.horizon()) throw std::invalid_argument("refine_trading_nodes: horizon beyond the grid");
    const double tol = 1e-12 * std::max(1.0, grid.horizon());
    auto near_base_node = [&](double s) {
        if (grid.n_steps() == 0) return std::abs(s) <= tol;
        const double k = std::round(s / grid.dt());
        return std::abs(grid.node(static_cast<int>(k)) - s) <= tol;
    };

    std::vector<NodePoint> points;
    bool horizon_is_node = false;
    for (int k = 0; k <= grid.n_steps(); ++k) {
        double t = grid.node(k);
        if (std::abs(t - horizon) <= tol) {
            t = horizon;
            horizon_is_node = true;
        }
        points.push_back({t, true, brownian.values[k]});
        if (t >= horizon) break;  // one node at or past the horizon anchors the last bridge
    }
    if (!horizon_is_node) points.push_back({horizon, false, 0.0});
    if (tau1 <= horizon && !near_base_node(tau1)) {
        const double pinned = (std::log(spec.barrier) + 0.5 * spec.sigma * spec.sigma * tau1) / spec.sigma;
        points.push_back({tau1, true, pinned});
    }
    for (double jump : poisson.jump_times) {
        if (jump > horizon) break;
        if (!near_base_node(jump) && jump != tau1) points.push_back({jump, false, 0.0});
    }
    std::stable_sort(points.begin(), points.end(), [](const NodePoint& a, const NodePoint& b) { return a.t < b.t; });

    std::uint64_t ordinal = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].known) continue;
        std::size_t j = i + 1;
        while (j < points.size() && !points[j].known) ++j;
        if (j == points.size()) throw std::logic_error("refine_trading_nodes: no right anchor for bridge");
        const NodePoint& a = points[i - 1];
        const NodePoint& c = points[j];
        const double s = points[i].t;
        const double span = c.t - a.t;
        const double w = (s - a.t) / span;
        const double sd = std::sqrt(std::max(0.0, (s - a.t) * (c.t - s) / span));
        points[i].b = a.b + w * (c.b - a.b) + sd * bridge.normal_at(ordinal++);
        points[i].known = true;
    }

    TradingPath out;
    out.t.reserve(points.size());
    out.b.reserve(points.size());
    out.n.reserve(points.size());
    for (const auto& p : points) {
        if (p.t > horizon) break;
        out.t.push_back(p.t);
        out.b.push_back(p.b);
        out.n.push_back(poisson.count_at(p.t));
    }
    return out;
}

PathBundle simulate_bundle(const MarketSpec& spec, int n_steps, std::uint64_t master_seed,
                           std::uint64_t path_index, bool bridge_correction) {
    PathBundle bundle;
    bundle.seed = master_seed;
    bundle.path_index = path_index;
    bundle.grid = TimeGrid(spec.T_prime, n_steps);

    RngStream increments(master_seed, path_index, Substream::brownian);
    bundle.brownian = simulate_brownian(bundle.grid, increments);
    RngStream arrivals = increments.substream(Substream::poisson);
    bundle.poisson = simulate_poisson(bundle.grid, spec.lambda, arrivals);

    const RngStream crossing = increments.substream(Substream::crossing);
    bundle.tau1 = first_hitting_time(spec, bundle.brownian, bundle.grid, {bridge_correction, &crossing});
    bundle.tau2 = first_jump_time(bundle.poisson);
    bundle.tau = std::min(bundle.tau1, bundle.tau2);
    bundle.trading = refine_trading_nodes(spec, bundle.brownian, bundle.poisson, bundle.grid, bundle.tau1,
                                          std::min(spec.T, bundle.grid.horizon()),
                                          increments.substream(Substream::bridge));
    return bundle;
}

}  // namespace markedtime
