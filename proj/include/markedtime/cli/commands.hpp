#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "markedtime/cli/config.hpp"
#include "markedtime/cli/report.hpp"

namespace markedtime::cli {

/// Exit codes of the runner.
enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,
    kInvalidConfig = 2,
    kInadmissible = 3,
    kRuntimeError = 4,
};

struct CommandOutcome {
    int exit_code = kOk;
    std::vector<ResultRow> rows;
    nlohmann::ordered_json details;
    std::vector<std::filesystem::path> files;
    /// One line shown to the user (first failure, abort reason, ...).
    std::string message;
};

CommandOutcome cmd_lab_check(const RunConfig& config);
CommandOutcome cmd_simulate(const RunConfig& config);
CommandOutcome cmd_estimate(const RunConfig& config);
CommandOutcome cmd_compare(const RunConfig& config);
CommandOutcome cmd_optimize(const RunConfig& config);
CommandOutcome cmd_density_check(const RunConfig& config);

const std::vector<std::string>& command_names();

/// Dispatches `command` ("lab check", "simulate", ...). Admissibility aborts
/// and runtime errors become exit codes; nothing is thrown.
CommandOutcome run_command(const std::string& command, const RunConfig& config);

/// ln x0 - pi1^2 sigma^2 T / 2 + lambda T (pi2 + ln(1 + pi2 (e^{-1}-1))): the
/// expected log utility of continuously rebalancing a constant allocation.
double continuous_rebalancing_value(const MarketSpec& spec, const Vec2& pi);

/// P(S1 reaches the barrier by T), by the reflection principle for Brownian
/// motion with drift.
double barrier_default_probability(const MarketSpec& spec);

void print_outcome(const CommandOutcome& outcome, std::ostream& out, std::ostream& err);

}  // namespace markedtime::cli
