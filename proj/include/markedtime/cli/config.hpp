#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "markedtime/estimator.hpp"
#include "markedtime/lab/suite.hpp"
#include "markedtime/model_checks.hpp"
#include "markedtime/optimizer.hpp"

namespace markedtime::cli {

enum class OutputFormat { csv, json };

struct EstimateOptions {
    std::string strategy = "ordinary";  // ordinary | insider | constant
    Vec2 pi{};                          // used by "constant"
};

struct OptimizeOptions {
    int grid_steps = 41;
    AllocationBox box;
    double epsilon = 0.05;
    bool stationarity = true;
};

struct DensityOptions {
    /// Empty means default_density_probes() restricted to t < T'.
    std::vector<DensityProbe> probes;
    bool check_density = true;  // normalization and unit mean
    bool check_drift = true;
    std::int64_t samples = 100000;
    double tolerance = 1e-6;
    std::vector<DensityProbe> drift_probes;  // empty: the t > 0 default probes up to 5
    std::int64_t drift_samples = 1000000;
    double drift_h = 1e-3;
};

/// Everything needed to run one subcommand. Built from a JSON file plus
/// command-line overrides and validated as a whole.
struct RunConfig {
    /// Subcommand being configured; probe fields are only checked for density-check.
    std::string command;
    std::string experiment;
    ExperimentConfig run;
    std::filesystem::path out_dir = "results";
    std::vector<OutputFormat> formats{OutputFormat::csv};
    EstimateOptions estimate;
    OptimizeOptions optimize;
    DensityOptions density;
    lab::LabSuiteOptions lab;
    /// Unknown keys and type errors found while parsing; reported together
    /// with the value checks.
    std::vector<std::string> parse_problems;

    std::vector<std::string> problems() const;
    void validate() const;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> paths;
    std::optional<int> steps;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<int> workers;
    bool no_bridge = false;
    bool no_crn = false;
};

/// Parses a JSON config. Throws ValidationError only for malformed JSON;
/// field problems are kept in parse_problems for validation.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Applies overrides on top of `config` and validates the result.
RunConfig finalize_config(RunConfig config, const Overrides& overrides, const std::string& command);

std::vector<DensityProbe> density_probes(const RunConfig& config);
std::vector<DensityProbe> drift_probes(const RunConfig& config);

}  // namespace markedtime::cli
