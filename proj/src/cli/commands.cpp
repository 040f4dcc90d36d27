#include "markedtime/cli/commands.hpp"

#include <cmath>
#include <ostream>

#include <boost/math/distributions/normal.hpp>

#include "markedtime/hybrid_model.hpp"

namespace markedtime::cli {

namespace {

const std::string kNone;
const double kNaN = std::nan("");

ResultRow row(const RunConfig& c, const std::string& estimator, const EstimateCI& ci, const std::string& label,
              double value, int n_steps) {
    return make_row(c, estimator, ci.n, n_steps, ci.seed, ci.mean, ci.se, label, value);
}

ResultRow row(const RunConfig& c, const std::string& estimator, const EstimateCI& ci, const std::string& label,
              double value) {
    return row(c, estimator, ci, label, value, c.run.n_steps);
}

nlohmann::ordered_json ci_json(const EstimateCI& ci) {
    nlohmann::ordered_json j;
    j["mean"] = ci.mean;
    j["se"] = ci.se;
    j["n"] = ci.n;
    j["seed"] = ci.seed;
    return j;
}

nlohmann::ordered_json run_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    const auto& s = c.run.spec;
    j["market"] = {{"sigma", s.sigma}, {"lambda", s.lambda}, {"barrier", s.barrier},
                   {"T", s.T},         {"T_prime", s.T_prime}, {"x0", s.x0}};
    j["n_paths"] = c.run.n_paths;
    j["n_steps"] = c.run.n_steps;
    j["seed"] = c.run.master_seed;
    j["bridge_correction"] = c.run.bridge_correction;
    j["crn"] = c.run.crn;
    return j;
}

std::string probe_label(std::size_t i) { return "probe" + std::to_string(i); }

nlohmann::ordered_json probe_json(const DensityProbe& p) {
    return {{"t", p.state.t}, {"b", p.state.b}, {"n_left", p.state.n_left},
            {"n", p.state.n}, {"x1", p.mark.x1},  {"k", p.mark.k}};
}

void finish(const RunConfig& config, CommandOutcome& out) {
    auto files = write_results(config, out.rows, out.details);
    out.files.insert(out.files.end(), files.begin(), files.end());
}

}  // namespace

double continuous_rebalancing_value(const MarketSpec& spec, const Vec2& pi) {
    const double growth = 1.0 + pi[1] * kJumpSize;
    if (!(growth > 0.0)) return kNaN;
    return std::log(spec.x0) - 0.5 * pi[0] * pi[0] * spec.sigma * spec.sigma * spec.T +
           spec.lambda * spec.T * (pi[1] + std::log(growth));
}

double barrier_default_probability(const MarketSpec& spec) {
    const boost::math::normal_distribution<double> phi;
    const double a = std::log(spec.barrier);  // < 0
    const double mu = -0.5 * spec.sigma * spec.sigma;
    const double s = spec.sigma * std::sqrt(spec.T);
    // P(min_{u<=T} (mu u + sigma B_u) <= a); exp(2 mu a / sigma^2) = 1 / barrier
    return cdf(phi, (a - mu * spec.T) / s) + std::exp(2.0 * mu * a / (spec.sigma * spec.sigma)) *
                                                cdf(phi, (a + mu * spec.T) / s);
}

CommandOutcome cmd_lab_check(const RunConfig& config) {
    CommandOutcome out;
    const auto result = lab::run_lab_suite(config.lab);
    out.details = result.manifest;
    out.files.push_back(write_text(config, config.experiment + "_manifest.json", result.manifest.dump(2) + "\n"));
    out.exit_code = result.all_pass ? kOk : kCheckFailed;
    out.message = result.all_pass ? "all lab checks pass" : "lab check failed: " + result.first_failure;
    return out;
}

CommandOutcome cmd_simulate(const RunConfig& config) {
    const auto& c = config.run;
    const auto& s = c.spec;
    const std::int64_t n = c.n_paths;
    std::vector<double> s1(n), s2(n), d1(n), d2(n), d(n), lx1(n), k(n);
    parallel_for(n, c.workers, [&](std::int64_t i) {
        const PathBundle b = simulate_scenario(s, c.n_steps, c.master_seed, static_cast<std::uint64_t>(i),
                                               c.bridge_correction);
        const auto values = asset_values(s, b);
        s1[i] = values.back()[0];
        s2[i] = values.back()[1];
        d1[i] = b.tau1 <= s.T ? 1.0 : 0.0;
        d2[i] = b.tau2 <= s.T ? 1.0 : 0.0;
        d[i] = b.tau <= s.T ? 1.0 : 0.0;
        lx1[i] = std::log(b.mark->x1);
        k[i] = b.mark->k;
    });
    const double p1 = barrier_default_probability(s);
    const double p2 = -std::expm1(-s.lambda * s.T);

    CommandOutcome out;
    auto add = [&](const std::string& name, const std::vector<double>& v, const std::string& label, double value) {
        out.rows.push_back(row(config, name, summarize(v, c.master_seed), label, value));
    };
    add("mean_S1_T", s1, "martingale", 1.0);
    add("mean_S2_T", s2, "exp_lambda_e_inv_T", std::exp(s.lambda * std::exp(-1.0) * s.T));
    add("p_default_barrier", d1, "first_passage", p1);
    add("p_default_jump", d2, "poisson_first_jump", p2);
    add("p_default", d, "independent_defaults", 1.0 - (1.0 - p1) * (1.0 - p2));
    add("mean_log_mark_x1", lx1, "lognormal_mean", -0.5 * s.sigma * s.sigma * s.T_prime);
    add("mean_mark_k", k, "poisson_mean", s.lambda * s.T_prime);
    out.details["run"] = run_json(config);
    finish(config, out);
    return out;
}

CommandOutcome cmd_estimate(const RunConfig& config) {
    const auto& c = config.run;
    CommandOutcome out;
    out.details["run"] = run_json(config);
    out.details["strategy"] = config.estimate.strategy;
    if (config.estimate.strategy == "ordinary") {
        const auto ci = estimate_expected_log_utility(ordinary_strategy(c.spec), c);
        for (const auto& vf : closed_form_VF(c.spec)) out.rows.push_back(row(config, "v_ordinary", ci, "vf:" + vf.label, vf.value));
        out.rows.push_back(row(config, "v_ordinary", ci, "diag:jump_exact", jump_exact_VF(c.spec)));
    } else if (config.estimate.strategy == "insider") {
        const auto ci = estimate_expected_log_utility(insider_strategy(c.spec), c);
        out.rows.push_back(row(config, "v_insider", ci, kNone, kNaN));
    } else {
        const Vec2 pi = config.estimate.pi;
        const auto ci = estimate_expected_log_utility(constant_strategy(pi), c);
        out.details["pi"] = {pi[0], pi[1]};
        out.rows.push_back(row(config, "v_constant", ci, "diag:continuous_rebalancing",
                               continuous_rebalancing_value(c.spec, pi)));
    }
    finish(config, out);
    return out;
}

CommandOutcome cmd_compare(const RunConfig& config) {
    const auto& c = config.run;
    const auto report = additional_utility(c);
    CommandOutcome out;
    const char* vf_labels[] = {"vf:theorem", "vf:printed"};
    const char* gain_labels[] = {"gain:sigma_inv_plus_one", "gain:two"};
    for (const char* vf : vf_labels) {
        const double v = find_label(report.closed_form_candidates, vf).value;
        for (const char* g : gain_labels) {
            const double gv = find_label(report.closed_form_candidates, g).value;
            const std::string label = std::string(vf) + "+" + g;
            out.rows.push_back(row(config, "v_ordinary", report.v_ordinary, label, v));
            out.rows.push_back(row(config, "v_insider", report.v_insider, label, v + gv));
            out.rows.push_back(row(config, "gain", report.gain, label, gv));
        }
    }
    // the gain minus c * (log term), path by path, against 0
    for (const char* g : gain_labels) {
        EstimateCI resid = report.gain;
        resid.mean = report.gain.mean - find_label(report.closed_form_candidates, g).value;
        resid.se = find_label(report.gain_residual_se, g).value;
        out.rows.push_back(row(config, "gain_residual", resid, g, 0.0));
    }
    out.rows.push_back(row(config, "e_log_term", report.e_log_term, kNone, kNaN));
    {
        EstimateCI gap;
        gap.mean = prefactor_sigma(c.spec) - 2.0;
        gap.n = report.gain.n;
        gap.seed = c.master_seed;
        out.rows.push_back(
            row(config, "prefactor_gap", gap, report.triage_degenerate ? "triage-degenerate" : "discriminating", 0.0));
    }

    auto& d = out.details;
    d["run"] = run_json(config);
    d["v_ordinary"] = ci_json(report.v_ordinary);
    d["v_insider"] = ci_json(report.v_insider);
    d["gain"] = ci_json(report.gain);
    d["e_log_term"] = ci_json(report.e_log_term);
    for (const auto& lv : report.closed_form_candidates) d["closed_form_candidates"][lv.label] = lv.value;
    for (const auto& lv : report.z_scores) d["z_scores"][lv.label] = lv.value;
    d["diagnostics"]["jump_exact_vf"] = jump_exact_VF(c.spec);
    d["triage"] = report.triage_degenerate ? "triage-degenerate" : "discriminating";
    if (report.triage_degenerate) out.message = "sigma = 1: triage-degenerate (the gain prefactors coincide)";
    finish(config, out);
    return out;
}

CommandOutcome cmd_optimize(const RunConfig& config) {
    const auto& c = config.run;
    const auto& o = config.optimize;
    CommandOutcome out;
    const auto grid = grid_optimize_constant(c, o.box, o.grid_steps);

    std::string surface = "pi1,pi2,mean,se\n";
    std::int64_t admissible = 0;
    for (const auto& cell : grid.cells) {
        const bool ok = cell.admissible;
        admissible += ok;
        surface += format_number(cell.pi[0]) + "," + format_number(cell.pi[1]) + "," +
                   (ok ? format_number(cell.utility.mean) : "") + "," + (ok ? format_number(cell.utility.se) : "") +
                   "\n";
    }
    out.files.push_back(write_text(config, config.experiment + "_surface.csv", surface));

    const auto& best = grid.best();
    const Vec2 alpha = market_alpha(c.spec);
    // z of these rows is the distance to alpha in cell widths
    for (int axis = 0; axis < 2; ++axis) {
        EstimateCI ci = best.utility;
        ci.mean = best.pi[axis];
        ci.se = grid.cell_width[axis];
        out.rows.push_back(row(config, "argmax_pi" + std::to_string(axis + 1), ci,
                               "alpha" + std::to_string(axis + 1), alpha[axis]));
    }
    out.rows.push_back(row(config, "argmax_utility", best.utility, "diag:continuous_rebalancing",
                           continuous_rebalancing_value(c.spec, best.pi)));

    auto& d = out.details;
    d["run"] = run_json(config);
    d["grid"] = {{"steps", grid.steps},
                 {"box", {o.box.lo1, o.box.hi1, o.box.lo2, o.box.hi2}},
                 {"cell_width", {grid.cell_width[0], grid.cell_width[1]}},
                 {"admissible_cells", admissible},
                 {"argmax", {best.pi[0], best.pi[1]}},
                 {"alpha", {alpha[0], alpha[1]}}};

    if (o.stationarity) {
        try {
            const auto st = stationarity_check(c, o.epsilon);
            nlohmann::ordered_json sj;
            sj["epsilon"] = st.epsilon;
            sj["base"] = ci_json(st.base);
            for (const auto& p : st.perturbations) {
                const std::string name = "stationarity_" + p.regime + "_axis" + std::to_string(p.axis + 1) +
                                         (p.sign > 0 ? "_plus" : "_minus");
                out.rows.push_back(row(config, name, p.difference, "zero", 0.0));
                sj["perturbations"].push_back({{"name", name}, {"mean", p.difference.mean},
                                               {"se", p.difference.se}, {"pass", p.pass}});
            }
            for (const auto& cv : st.curvatures) {
                const std::string name = "curvature_" + cv.regime + "_axis" + std::to_string(cv.axis + 1);
                out.rows.push_back(row(config, name, cv.second_difference, "zero", 0.0));
                sj["curvatures"].push_back({{"name", name}, {"mean", cv.second_difference.mean},
                                            {"se", cv.second_difference.se}, {"pass", cv.pass}});
            }
            sj["all_pass"] = st.all_pass();
            d["stationarity"] = sj;
        } catch (const AdmissibilityViolation& e) {
            d["stationarity"] = {{"error", e.what()},
                                 {"seed", e.seed()},
                                 {"path_index", e.path_index()},
                                 {"violating_paths", e.violating_paths()}};
            out.exit_code = kInadmissible;
            out.message = std::string("stationarity check aborted: ") + e.what();
        }
    }
    finish(config, out);
    return out;
}

CommandOutcome cmd_density_check(const RunConfig& config) {
    const auto& c = config.run;
    const auto& dn = config.density;
    CommandOutcome out;
    std::vector<std::string> breaches;
    auto& d = out.details;
    d["run"] = run_json(config);
    d["tolerance"] = dn.tolerance;

    const auto probes_used = dn.check_density ? density_probes(config) : std::vector<DensityProbe>{};
    for (std::size_t i = 0; i < probes_used.size(); ++i) {
        const auto& p = probes_used[i];
        const std::uint64_t seed = mix_seed(c.master_seed, 0xD0000 + i);
        EstimateCI norm;
        norm.mean = density_normalization(c.spec, p.state);
        norm.n = 1;
        norm.seed = seed;
        out.rows.push_back(row(config, "normalization_" + probe_label(i), norm, "unit_mass", 1.0, 0));
        if (!(std::abs(norm.mean - 1.0) <= dn.tolerance))
            breaches.push_back("normalization at " + probe_label(i) + " is " + format_number(norm.mean));

        const auto mc = density_unit_mean(c.spec, p.state.t, p.mark, dn.samples, seed, c.workers);
        out.rows.push_back(row(config, "unit_mean_" + probe_label(i), mc, "unit_mean", 1.0, 0));
        if (mc.se > 0.0 && std::abs(mc.mean - 1.0) > 3.0 * mc.se)
            breaches.push_back("unit mean at " + probe_label(i) + " off by " + format_number((mc.mean - 1.0) / mc.se) +
                               " se");
        if (mc.se == 0.0 && mc.mean != 1.0) breaches.push_back("unit mean at " + probe_label(i) + " is not 1");
        d["probes"].push_back(probe_json(p));
    }

    const auto probes = dn.check_drift ? drift_probes(config) : std::vector<DensityProbe>{};
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const auto& p = probes[i];
        const std::uint64_t seed = mix_seed(c.master_seed, 0xD1000 + i);
        const auto r = drift_oracle(c.spec, p.state, p.mark, dn.drift_h, dn.drift_samples, seed, c.workers);
        const EstimateCI* est[2] = {&r.m1, &r.m2};
        for (int axis = 0; axis < 2; ++axis) {
            const std::string name = "drift_m" + std::to_string(axis + 1) + "_" + probe_label(i);
            out.rows.push_back(row(config, name, *est[axis], "information_drift", r.formula[axis], 1));
            if (std::abs(est[axis]->mean - r.formula[axis]) > 3.0 * est[axis]->se)
                breaches.push_back(name + " off by " + format_number((est[axis]->mean - r.formula[axis]) / est[axis]->se) +
                                   " se");
        }
        d["drift_probes"].push_back(probe_json(p));
    }
    d["drift_h"] = dn.drift_h;
    d["breaches"] = breaches;
    if (!breaches.empty()) {
        out.exit_code = kCheckFailed;
        out.message = "density check failed: " + breaches.front();
    } else {
        out.message = "density checks pass";
    }
    finish(config, out);
    return out;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"lab check", "simulate", "estimate",
                                                "compare",   "optimize", "density-check"};
    return names;
}

CommandOutcome run_command(const std::string& command, const RunConfig& config) {
    try {
        if (command == "lab check") return cmd_lab_check(config);
        if (command == "simulate") return cmd_simulate(config);
        if (command == "estimate") return cmd_estimate(config);
        if (command == "compare") return cmd_compare(config);
        if (command == "optimize") return cmd_optimize(config);
        if (command == "density-check") return cmd_density_check(config);
        CommandOutcome out;
        out.exit_code = kInvalidConfig;
        out.message = "unknown command " + command;
        return out;
    } catch (const AdmissibilityViolation& e) {
        CommandOutcome out;
        out.exit_code = kInadmissible;
        out.message = std::string("aborted: ") + e.what();
        out.details = {{"error", e.what()},
                       {"seed", e.seed()},
                       {"path_index", e.path_index()},
                       {"violating_paths", e.violating_paths()}};
        return out;
    } catch (const ValidationError& e) {
        CommandOutcome out;
        out.exit_code = kInvalidConfig;
        out.message = e.what();
        return out;
    } catch (const std::exception& e) {
        CommandOutcome out;
        out.exit_code = kRuntimeError;
        out.message = e.what();
        return out;
    }
}

void print_outcome(const CommandOutcome& outcome, std::ostream& out, std::ostream& err) {
    for (const auto& r : outcome.rows) {
        out << r.estimator << "  " << (r.closed_form_label.empty() ? "-" : r.closed_form_label)
            << "  mean=" << format_number(r.mean) << "  se=" << format_number(r.se);
        if (!std::isnan(r.z_score)) out << "  z=" << format_number(r.z_score);
        out << "\n";
    }
    for (const auto& f : outcome.files) out << "wrote " << f.string() << "\n";
    if (!outcome.message.empty()) (outcome.exit_code == kOk ? out : err) << outcome.message << "\n";
}

}  // namespace markedtime::cli
