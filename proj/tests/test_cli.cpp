#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "markedtime/cli/commands.hpp"

using namespace markedtime;
using namespace markedtime::cli;
namespace fs = std::filesystem;

namespace {
RunConfig small(const std::string& command, const std::string& dir) {
    auto c = parse_config(R"({"market": {"T_prime": 1.5}, "n_paths": 300, "n_steps": 1500,
                              "density": {"samples": 2000, "drift_samples": 20000},
                              "optimize": {"grid_steps": 4, "stationarity": false}, "lab": {"models": 3}})");
    Overrides o;
    o.out = (fs::temp_directory_path() / "markedtime_test_cli" / dir).string();
    return finalize_config(c, o, command);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}
}  // namespace

TEST_CASE("config problems are reported together") {
    CHECK(parse_config(R"({"n_paths": "many", "market": {"sigma": 1, "rho": 0}, "extra": true})")
              .parse_problems.size() == 3);
    auto c = parse_config(R"({"n_paths": 0, "market": {"sigma": -1, "rho": 0}})");
    try {
        finalize_config(c, {}, "simulate");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.problems().size() == 3);  // unknown key, sigma, n_paths
    }
    CHECK_THROWS_AS(parse_config("{not json"), ValidationError);
}

TEST_CASE("overrides win over the file") {
    auto c = parse_config(R"({"seed": 4, "n_paths": 10, "crn": true, "output": {"formats": ["json"]}})");
    Overrides o;
    o.seed = 8;
    o.paths = 20;
    o.no_crn = true;
    o.no_bridge = true;
    o.format = "csv";
    const auto f = finalize_config(c, o, "compare");
    CHECK(f.run.master_seed == 8);
    CHECK(f.run.n_paths == 20);
    CHECK(!f.run.crn);
    CHECK(!f.run.bridge_correction);
    CHECK(f.formats == std::vector<OutputFormat>{OutputFormat::csv});
    CHECK(f.experiment == "compare");
}

TEST_CASE("probes at or after T' are rejected for density-check") {
    auto c = parse_config(R"({"density": {"probes": [{"t": 2.0, "x1": 1, "k": 0}]}})");
    try {
        finalize_config(c, {}, "density-check");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("not before T'") != std::string::npos);
    }
}

TEST_CASE("csv follows the row schema and z invariant") {
    const auto c = small("simulate", "sim");
    const auto o = run_command("simulate", c);
    REQUIRE(o.exit_code == kOk);
    const auto text = slurp(c.out_dir / "simulate.csv");
    CHECK(text.rfind("run_id,experiment,estimator,n_paths,n_steps,seed,mean,se,closed_form_label,closed_form_value,"
                     "z_score\n",
                     0) == 0);
    for (const auto& r : o.rows) {
        if (r.se > 0) CHECK(r.z_score == (r.mean - r.closed_form_value) / r.se);
        CHECK(r.run_id.size() == 16);
        CHECK(r.seed == c.run.master_seed);
    }
}

TEST_CASE("compare emits three rows per candidate and reruns byte-identically") {
    auto c = small("compare", "cmp");
    const auto a = run_command("compare", c);
    REQUIRE(a.exit_code == kOk);
    const auto first = slurp(c.out_dir / "compare.csv");
    c.run.workers = 1;
    const auto b = run_command("compare", c);
    CHECK(slurp(c.out_dir / "compare.csv") == first);
    for (const char* label : {"vf:theorem+gain:two", "vf:printed+gain:sigma_inv_plus_one"}) {
        int n = 0;
        for (const auto& r : a.rows) n += r.closed_form_label == label;
        CHECK(n == 3);
    }
}

TEST_CASE("sigma = 1 is flagged triage-degenerate") {
    auto c = small("compare", "cmp1");
    c.run.spec.sigma = 1.0;
    c.formats = {OutputFormat::json};
    const auto o = run_command("compare", c);
    REQUIRE(o.exit_code == kOk);
    CHECK(slurp(c.out_dir / "compare.json").find("triage-degenerate") != std::string::npos);
}

TEST_CASE("optimize writes steps^2 surface rows") {
    const auto c = small("optimize", "opt");
    const auto o = run_command("optimize", c);
    REQUIRE(o.exit_code == kOk);
    std::ifstream in(c.out_dir / "optimize_surface.csv");
    std::string line;
    int n = 0;
    while (std::getline(in, line)) ++n;
    CHECK(n == 1 + 16);
}

TEST_CASE("density-check passes at t = 0 exactly") {
    auto c = small("density-check", "den");
    c.density.probes = {DensityProbe{{0.0, 0.0, 0, 0}, {0.8, 1}}};
    c.density.check_drift = false;
    const auto o = run_command("density-check", c);
    CHECK(o.exit_code == kOk);
    CHECK(o.rows[0].mean == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(o.rows[1].mean == 1.0);
}

TEST_CASE("lab check exit codes") {
    auto c = small("lab check", "lab");
    CHECK(run_command("lab check", c).exit_code == kOk);
    c.lab.zero_kernel_entry = true;
    const auto o = run_command("lab check", c);
    CHECK(o.exit_code != kOk);
    CHECK(o.message.find("mark kernel not strictly positive") != std::string::npos);
}

TEST_CASE("inadmissible insider aborts compare") {
    auto c = small("compare", "abort");
    c.run.spec.T_prime = 2.0;
    c.run.n_paths = 3000;
    const auto o = run_command("compare", c);
    CHECK(o.exit_code == kInadmissible);
    CHECK(o.message.find("admissibility") != std::string::npos);
}

TEST_CASE("number formatting round-trips") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
}

TEST_CASE("closed forms used by simulate") {
    MarketSpec s;
    // barrier equal to 1 would default immediately; a tiny barrier almost never
    s.barrier = 1e-12;
    CHECK(barrier_default_probability(s) < 1e-12);
    s.barrier = 0.5;
    const double p = barrier_default_probability(s);
    CHECK(p > 0.2);
    CHECK(p < 0.3);
    CHECK(continuous_rebalancing_value(s, {0.0, 2.0}) != continuous_rebalancing_value(s, {0.0, 2.0}));
}
