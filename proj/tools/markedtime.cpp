// Command-line runner for the hybrid-market experiments and the lattice lab.
#include <iostream>

#include <CLI11.hpp>

#include "markedtime/cli/commands.hpp"

using namespace markedtime;

int main(int argc, char** argv) {
    CLI::App app{"Insider trading with a default-revealing mark: simulations, estimators and exact lattice checks"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    cli::Overrides ov;
    std::uint64_t seed = 0;
    int paths = 0, steps = 0, workers = 0;
    std::string out_dir, format;
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "master seed");
    auto* paths_opt = app.add_option("--paths", paths, "number of Monte Carlo paths");
    auto* steps_opt = app.add_option("--steps", steps, "time steps on [0, T']");
    auto* out_opt = app.add_option("--out", out_dir, "output directory");
    auto* fmt_opt = app.add_option("--format", format, "csv or json");
    auto* workers_opt = app.add_option("--workers", workers, "worker threads (0 = all cores)");
    app.add_flag("--no-bridge", ov.no_bridge, "disable the Brownian bridge crossing correction");
    app.add_flag("--no-crn", ov.no_crn, "independent paths for the insider in compare");

    auto* lab = app.add_subcommand("lab", "exact checks on finite lattice models");
    lab->require_subcommand(1);
    auto* lab_check = lab->add_subcommand("check", "run the lattice suite and write a JSON manifest");
    auto* simulate = app.add_subcommand("simulate", "simulate the market and compare path statistics to closed forms");
    auto* estimate = app.add_subcommand("estimate", "estimate the expected log utility of one strategy");
    auto* compare = app.add_subcommand("compare", "ordinary vs insider optimum on common random numbers");
    auto* optimize = app.add_subcommand("optimize", "constant-allocation grid search and stationarity check");
    auto* density = app.add_subcommand("density-check", "normalization, unit mean and drift of the mark density");
    for (auto* sub : {lab, simulate, estimate, compare, optimize, density}) sub->fallthrough();
    lab_check->fallthrough();

    CLI11_PARSE(app, argc, argv);

    std::string command;
    if (lab_check->parsed()) command = "lab check";
    for (auto* sub : {simulate, estimate, compare, optimize, density})
        if (sub->parsed()) command = sub->get_name();

    if (seed_opt->count()) ov.seed = seed;
    if (paths_opt->count()) ov.paths = paths;
    if (steps_opt->count()) ov.steps = steps;
    if (out_opt->count()) ov.out = out_dir;
    if (fmt_opt->count()) ov.format = format;
    if (workers_opt->count()) ov.workers = workers;

    cli::RunConfig config;
    try {
        if (!config_path.empty()) config = cli::load_config(config_path);
        config = cli::finalize_config(std::move(config), ov, command);
    } catch (const ValidationError& e) {
        std::cerr << "invalid configuration:\n";
        for (const auto& p : e.problems()) std::cerr << "  - " << p << "\n";
        return cli::kInvalidConfig;
    }

    const auto outcome = cli::run_command(command, config);
    cli::print_outcome(outcome, std::cout, std::cerr);
    return outcome.exit_code;
}
