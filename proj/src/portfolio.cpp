#include "markedtime/portfolio.hpp"

#include <cmath>
#include <utility>

#include "markedtime/hybrid_model.hpp"

namespace markedtime {

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::ordinary: return "ordinary";
        case StrategyKind::insider: return "insider";
        case StrategyKind::custom: return "custom";
    }
    return "custom";
}

Vec2 DecomposedStrategy::allocation(const DriverState& state, double tau, const std::optional<Mark>& mark) const {
    if (state.t < tau) return pre_default(state);
    if (kind == StrategyKind::ordinary) return post_default(state, Mark{});
    if (!mark) throw std::invalid_argument("strategy needs the mark after default but the bundle has none");
    return post_default(state, *mark);
}

DecomposedStrategy ordinary_strategy(const MarketSpec& spec) {
    const Vec2 alpha = market_alpha(spec);
    return {[alpha](const DriverState&) { return alpha; },
            [alpha](const DriverState&, const Mark&) { return alpha; }, StrategyKind::ordinary};
}

DecomposedStrategy insider_strategy(const MarketSpec& spec) {
    const Vec2 alpha = market_alpha(spec);
    return {[alpha](const DriverState&) { return alpha; },
            [alpha, spec](const DriverState& state, const Mark& mark) {
                return alpha + info_drift(spec, state, mark);
            },
            StrategyKind::insider};
}

DecomposedStrategy constant_strategy(Vec2 pi) {
    return {[pi](const DriverState&) { return pi; }, [pi](const DriverState&, const Mark&) { return pi; },
            StrategyKind::ordinary};
}

DecomposedStrategy shifted_strategy(DecomposedStrategy base, Vec2 pre_shift, Vec2 post_shift) {
    auto pre = std::move(base.pre_default);
    auto post = std::move(base.post_default);
    DecomposedStrategy out;
    out.pre_default = [pre, pre_shift](const DriverState& s) { return pre(s) + pre_shift; };
    out.post_default = [post, post_shift](const DriverState& s, const Mark& m) { return post(s, m) + post_shift; };
    out.kind = base.kind;
    return out;
}

AdmissibilityViolation::AdmissibilityViolation(const std::string& what, AdmissibilityReport report,
                                               std::uint64_t seed, std::uint64_t path_index,
                                               std::uint64_t violating_paths)
    : std::runtime_error(what),
      report_(report),
      seed_(seed),
      path_index_(path_index),
      violating_paths_(violating_paths) {}

namespace {

template <class OnStep>
AdmissibilityReport walk_wealth(const DecomposedStrategy& strategy, const PathBundle& bundle,
                                const std::vector<Vec2>& increments, OnStep&& on_step) {
    const auto& path = bundle.trading;
    if (increments.size() + 1 != path.size() && !(path.size() <= 1 && increments.empty()))
        throw std::invalid_argument("wealth_path: increments do not match the trading nodes");
    AdmissibilityReport report;
    for (std::size_t i = 0; i < increments.size(); ++i) {
        const DriverState state{path.t[i], path.b[i], path.n[i], path.n[i]};
        const Vec2 pi = strategy.allocation(state, bundle.tau, bundle.mark);
        const double inner = dot(pi, increments[i]);
        if (!(1.0 + inner > 0.0)) {
            report.admissible = false;
            report.first_violation_step = i;
            report.violating_inner_product = inner;
            return report;
        }
        on_step(std::log1p(inner));
    }
    return report;
}

}  // namespace

WealthPath wealth_path(double x0, const DecomposedStrategy& strategy, const PathBundle& bundle,
                       const std::vector<Vec2>& increments) {
    if (!(x0 > 0.0)) throw std::invalid_argument("wealth_path: x0 must be > 0");
    WealthPath out;
    out.values.reserve(increments.size() + 1);
    out.values.push_back(x0);
    double log_v = std::log(x0);
    const auto report = walk_wealth(strategy, bundle, increments, [&](double step) {
        log_v += step;
        out.values.push_back(std::exp(log_v));
    });
    if (!report.admissible)
        throw AdmissibilityViolation("admissibility violated at step " + std::to_string(*report.first_violation_step) +
                                         ": 1 + pi.inc = " + std::to_string(1.0 + report.violating_inner_product),
                                     report, bundle.seed, bundle.path_index);
    out.log_terminal = log_v;
    return out;
}

double log_utility(const WealthPath& path) { return path.log_terminal; }

AdmissibilityReport log_terminal_wealth(double x0, const DecomposedStrategy& strategy, const PathBundle& bundle,
                                        const std::vector<Vec2>& increments, double& log_terminal) {
    double sum = std::log(x0);
    const auto report = walk_wealth(strategy, bundle, increments, [&](double step) { sum += step; });
    log_terminal = sum;
    return report;
}

}  // namespace markedtime
