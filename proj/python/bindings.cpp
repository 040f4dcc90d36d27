#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "markedtime/cli/commands.hpp"
#include "markedtime/cli/config.hpp"
#include "markedtime/estimator.hpp"
#include "markedtime/hybrid_model.hpp"
#include "markedtime/lab/suite.hpp"
#include "markedtime/model_checks.hpp"
#include "markedtime/portfolio.hpp"

namespace py = pybind11;
using namespace markedtime;

namespace {

py::dict ci_dict(const EstimateCI& ci) {
    py::dict d;
    d["mean"] = ci.mean;
    d["se"] = ci.se;
    d["n"] = ci.n;
    d["seed"] = ci.seed;
    return d;
}

ExperimentConfig experiment(const MarketSpec& spec, int n_paths, int n_steps, std::uint64_t seed, bool bridge,
                            bool crn, int workers) {
    ExperimentConfig c;
    c.spec = spec;
    c.n_paths = n_paths;
    c.n_steps = n_steps;
    c.master_seed = seed;
    c.bridge_correction = bridge;
    c.crn = crn;
    c.workers = workers;
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hybrid default market with a revealed mark: Monte Carlo and exact lattice checks";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<AdmissibilityViolation>(m, "AdmissibilityViolation", PyExc_RuntimeError);

    py::class_<MarketSpec>(m, "MarketSpec")
        .def(py::init([](double sigma, double lambda, double barrier, double T, double T_prime, double x0) {
                 MarketSpec s{sigma, lambda, barrier, T, T_prime, x0};
                 s.validate();
                 return s;
             }),
             py::arg("sigma") = 0.5, py::arg("lam") = 1.0, py::arg("barrier") = 0.5, py::arg("T") = 1.0,
             py::arg("T_prime") = 2.0, py::arg("x0") = 1.0)
        .def_readwrite("sigma", &MarketSpec::sigma)
        .def_readwrite("lam", &MarketSpec::lambda)
        .def_readwrite("barrier", &MarketSpec::barrier)
        .def_readwrite("T", &MarketSpec::T)
        .def_readwrite("T_prime", &MarketSpec::T_prime)
        .def_readwrite("x0", &MarketSpec::x0)
        .def("problems", &MarketSpec::problems);

    m.def("market_alpha", [](const MarketSpec& s) { return market_alpha(s); });
    m.def(
        "conditional_density",
        [](const MarketSpec& s, double t, double b, int n_left, int n, double x1, int k) {
            return conditional_density(s, {t, b, n_left, n}, {x1, k});
        },
        py::arg("spec"), py::arg("t"), py::arg("b"), py::arg("n_left"), py::arg("n"), py::arg("x1"), py::arg("k"));
    m.def(
        "info_drift",
        [](const MarketSpec& s, double t, double b, int n_left, int n, double x1, int k) {
            return info_drift(s, {t, b, n_left, n}, {x1, k});
        },
        py::arg("spec"), py::arg("t"), py::arg("b"), py::arg("n_left"), py::arg("n"), py::arg("x1"), py::arg("k"));
    m.def(
        "density_normalization",
        [](const MarketSpec& s, double t, double b, int n_left, int n) {
            return density_normalization(s, {t, b, n_left, n});
        },
        py::arg("spec"), py::arg("t"), py::arg("b"), py::arg("n_left"), py::arg("n"));
    m.def("closed_form_vf", [](const MarketSpec& s) {
        py::dict d;
        for (const auto& lv : closed_form_VF(s)) d[py::str(lv.label)] = lv.value;
        return d;
    });
    m.def("jump_exact_vf", &jump_exact_VF);

    m.def(
        "estimate",
        [](const MarketSpec& s, const std::string& strategy, int n_paths, int n_steps, std::uint64_t seed, bool bridge,
           int workers) {
            const auto c = experiment(s, n_paths, n_steps, seed, bridge, true, workers);
            if (strategy != "insider" && strategy != "ordinary")
                throw ValidationError({"strategy must be ordinary or insider"});
            c.validate();
            const auto st = strategy == "insider" ? insider_strategy(s) : ordinary_strategy(s);
            EstimateCI ci;
            {
                py::gil_scoped_release release;
                ci = estimate_expected_log_utility(st, c);
            }
            return ci_dict(ci);
        },
        py::arg("spec"), py::arg("strategy") = "ordinary", py::arg("n_paths") = 10000, py::arg("n_steps") = 1000,
        py::arg("seed") = 1, py::arg("bridge") = true, py::arg("workers") = 0);

    m.def(
        "compare",
        [](const MarketSpec& s, int n_paths, int n_steps, std::uint64_t seed, bool crn, int workers) {
            const auto c = experiment(s, n_paths, n_steps, seed, true, crn, workers);
            c.validate();
            ComparisonReport r;
            {
                py::gil_scoped_release release;
                r = additional_utility(c);
            }
            py::dict d;
            d["v_ordinary"] = ci_dict(r.v_ordinary);
            d["v_insider"] = ci_dict(r.v_insider);
            d["gain"] = ci_dict(r.gain);
            d["e_log_term"] = ci_dict(r.e_log_term);
            py::dict cf, z;
            for (const auto& lv : r.closed_form_candidates) cf[py::str(lv.label)] = lv.value;
            for (const auto& lv : r.z_scores) z[py::str(lv.label)] = lv.value;
            d["closed_form_candidates"] = cf;
            d["z_scores"] = z;
            d["triage_degenerate"] = r.triage_degenerate;
            return d;
        },
        py::arg("spec"), py::arg("n_paths") = 10000, py::arg("n_steps") = 1000, py::arg("seed") = 1,
        py::arg("crn") = true, py::arg("workers") = 0);

    m.def(
        "lab_check",
        [](int n_models, std::uint64_t seed, bool rational) {
            lab::LabSuiteOptions o;
            o.n_models = n_models;
            o.seed = seed;
            o.rational = rational;
            lab::LabSuiteResult r;
            {
                py::gil_scoped_release release;
                r = lab::run_lab_suite(o);
            }
            return py::make_tuple(r.all_pass, r.manifest.dump());
        },
        py::arg("n_models") = 100, py::arg("seed") = 20240611, py::arg("rational") = true);

    m.def(
        "run_command",
        [](const std::string& command, const std::string& config_json, const std::string& out_dir) {
            auto config = cli::parse_config(config_json);
            cli::Overrides o;
            if (!out_dir.empty()) o.out = out_dir;
            config = cli::finalize_config(std::move(config), o, command);
            cli::CommandOutcome r;
            {
                py::gil_scoped_release release;
                r = cli::run_command(command, config);
            }
            std::vector<std::string> files;
            for (const auto& f : r.files) files.push_back(f.string());
            return py::make_tuple(r.exit_code, r.message, files);
        },
        py::arg("command"), py::arg("config_json") = "{}", py::arg("out_dir") = "");
}
