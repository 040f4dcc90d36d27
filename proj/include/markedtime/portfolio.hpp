#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "markedtime/market.hpp"
#include "markedtime/sde.hpp"

namespace markedtime {

enum class StrategyKind { ordinary, insider, custom };

std::string to_string(StrategyKind kind);

/// A G-predictable allocation written as a pre-default rule and a post-default
/// rule that may also read the mark. Both rules receive left-limit state: for
/// the step (t_i, t_{i+1}] they see t_i, B_{t_i} and N_{t_i} (which is
/// N_{s-} for every s inside the step).
struct DecomposedStrategy {
    using PreRule = std::function<Vec2(const DriverState&)>;
    using PostRule = std::function<Vec2(const DriverState&, const Mark&)>;

    PreRule pre_default;
    PostRule post_default;
    StrategyKind kind = StrategyKind::custom;

    /// Allocation for the step starting at `state.t`; the post-default rule
    /// applies once state.t >= tau.
    Vec2 allocation(const DriverState& state, double tau, const std::optional<Mark>& mark) const;
};

/// pi = alpha before and after default.
DecomposedStrategy ordinary_strategy(const MarketSpec& spec);
/// pi = alpha before default, alpha + mu_t(G) from tau on.
DecomposedStrategy insider_strategy(const MarketSpec& spec);
/// The same allocation everywhere.
DecomposedStrategy constant_strategy(Vec2 pi);
/// `base` with `pre_shift` added before default and `post_shift` after.
DecomposedStrategy shifted_strategy(DecomposedStrategy base, Vec2 pre_shift, Vec2 post_shift);

struct AdmissibilityReport {
    bool admissible = true;
    std::optional<std::size_t> first_violation_step;
    /// pi . inc at the first violating step (the factor 1 + pi . inc is <= 0).
    double violating_inner_product = 0.0;
};

class AdmissibilityViolation : public std::runtime_error {
public:
    AdmissibilityViolation(const std::string& what, AdmissibilityReport report, std::uint64_t seed,
                           std::uint64_t path_index, std::uint64_t violating_paths = 1);

    const AdmissibilityReport& report() const { return report_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t path_index() const { return path_index_; }
    std::uint64_t violating_paths() const { return violating_paths_; }

private:
    AdmissibilityReport report_;
    std::uint64_t seed_;
    std::uint64_t path_index_;
    std::uint64_t violating_paths_;
};

struct WealthPath {
    std::vector<double> values;  // V at each trading node
    double log_terminal = 0.0;
};

/// V_{i+1} = V_i (1 + pi_i . inc_i). Throws AdmissibilityViolation when a
/// factor is <= 0.
WealthPath wealth_path(double x0, const DecomposedStrategy& strategy, const PathBundle& bundle,
                       const std::vector<Vec2>& increments);

double log_utility(const WealthPath& path);

/// ln V_T without storing the path. On a violation returns the report with
/// admissible == false and leaves `log_terminal` unspecified.
AdmissibilityReport log_terminal_wealth(double x0, const DecomposedStrategy& strategy, const PathBundle& bundle,
                                        const std::vector<Vec2>& increments, double& log_terminal);

}  // namespace markedtime
