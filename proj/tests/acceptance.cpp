// Acceptance run: one PASS/FAIL line per criterion. Criteria 1-7 run with 8
// workers into <dir>/workers8, then again with 1 worker into <dir>/workers1
// for criterion 8, which compares the two trees byte for byte.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "markedtime/cli/commands.hpp"
#include "markedtime/hybrid_model.hpp"

using namespace markedtime;
using namespace markedtime::cli;
namespace fs = std::filesystem;

namespace {

constexpr double kZ = 3.0;

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Verdict(int workers, const fs::path& dir)> run;
};

RunConfig base_config(const std::string& experiment, const fs::path& dir, int workers) {
    RunConfig c;
    c.experiment = experiment;
    c.out_dir = dir;
    c.formats = {OutputFormat::csv, OutputFormat::json};
    c.run.spec = MarketSpec{};  // sigma 0.5, lambda 1, T 1, T' 2, barrier 0.5, x0 1
    c.run.master_seed = 20240611;
    c.run.workers = workers;
    c.lab.workers = workers;
    return c;
}

// Runs a command and records its exit code and message next to its outputs,
// so aborted runs still leave a comparable artifact.
CommandOutcome run(const std::string& command, RunConfig c) {
    c.command = command;
    c.validate();
    auto out = run_command(command, c);
    std::ofstream f(c.out_dir / (c.experiment + "_outcome.txt"), std::ios::binary);
    f << "command: " << command << "\nexit_code: " << out.exit_code << "\nmessage: " << out.message << "\n";
    return out;
}

const ResultRow* find_row(const CommandOutcome& o, const std::string& estimator, const std::string& label) {
    for (const auto& r : o.rows)
        if (r.estimator == estimator && r.closed_form_label == label) return &r;
    return nullptr;
}

std::string fmt(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

bool within(const ResultRow& r, double z = kZ) { return std::isfinite(r.z_score) && std::abs(r.z_score) <= z; }

// Shared between criteria 4 and 7 (same worker pass).
std::map<int, std::string> g_vf_winner;

Verdict criterion_lab(int workers, const fs::path& dir) {
    auto c = base_config("c1_lab", dir, workers);
    const auto o = run("lab check", c);
    if (o.exit_code != kOk) return {false, o.message};
    int checks = 0;
    for (const auto& ch : o.details["checks"]) checks += ch["runs"].get<int>();
    return {true, std::to_string(o.details["n_models"].get<int>()) + " rational models, " + std::to_string(checks) +
                      " exact checks, all residuals 0"};
}

Verdict criterion_density(int workers, const fs::path& dir) {
    auto c = base_config("c2_density", dir, workers);
    c.density.check_drift = false;
    c.density.samples = 100000;
    const auto o = run("density-check", c);
    int norm = 0, norm_ok = 0, mc = 0, mc_ok = 0;
    double worst_norm = 0.0, worst_z = 0.0;
    for (const auto& r : o.rows) {
        if (r.estimator.rfind("normalization_", 0) == 0) {
            ++norm;
            worst_norm = std::max(worst_norm, std::abs(r.mean - 1.0));
            norm_ok += std::abs(r.mean - 1.0) <= 1e-6;
        } else if (r.estimator.rfind("unit_mean_", 0) == 0) {
            ++mc;
            // an exact 1 with se 0 is a pass (t = 0 probes)
            const bool ok = r.se > 0.0 ? std::abs(r.z_score) <= kZ : r.mean == 1.0;
            mc_ok += ok;
            if (r.se > 0.0) worst_z = std::max(worst_z, std::abs(r.z_score));
        }
    }
    const bool pass = o.exit_code == kOk && norm >= 10 && norm_ok == norm && mc_ok == mc;
    return {pass, std::to_string(norm_ok) + "/" + std::to_string(norm) + " probes normalized within 1e-6 (worst " +
                      fmt(worst_norm, 3) + "), " + std::to_string(mc_ok) + "/" + std::to_string(mc) +
                      " unit means within 3 SE (worst |z| " + fmt(worst_z, 3) + ")"};
}

Verdict criterion_drift(int workers, const fs::path& dir) {
    auto c = base_config("c3_drift", dir, workers);
    c.density.check_density = false;
    const auto o = run("density-check", c);
    int probes = 0, ok = 0;
    double worst = 0.0;
    for (const auto& r : o.rows)
        if (r.estimator.rfind("drift_m", 0) == 0) {
            ++probes;
            ok += within(r);
            worst = std::max(worst, std::abs(r.z_score));
        }
    probes /= 2;  // two components per probe
    const bool pass = o.exit_code == kOk && probes >= 5 && ok == 2 * probes;
    return {pass, std::to_string(probes) + " probe states, " + std::to_string(ok) + "/" + std::to_string(2 * probes) +
                      " drift components within 3 SE (worst |z| " + fmt(worst, 3) + ", h = " +
                      fmt(c.density.drift_h) + ")"};
}

Verdict criterion_vf(int workers, const fs::path& dir) {
    auto c = base_config("c4_vf", dir, workers);
    c.run.n_paths = 100000;
    c.run.n_steps = 2000;
    const auto o = run("estimate", c);
    if (o.exit_code != kOk) return {false, o.message};
    const auto* th = find_row(o, "v_ordinary", "vf:theorem");
    const auto* pr = find_row(o, "v_ordinary", "vf:printed");
    const auto* je = find_row(o, "v_ordinary", "diag:jump_exact");
    const bool a = within(*th), b = within(*pr);
    std::string winner = a != b ? (a ? "vf:theorem" : "vf:printed") : "";
    g_vf_winner[workers] = winner;
    const std::string detail = "MC " + fmt(th->mean) + " +- " + fmt(th->se, 3) + "; z(theorem " + fmt(th->closed_form_value) +
                               ") = " + fmt(th->z_score, 3) + ", z(printed " + fmt(pr->closed_form_value) + ") = " +
                               fmt(pr->z_score, 3) + "; diagnostic z(jump-exact " + fmt(je->closed_form_value) +
                               ") = " + fmt(je->z_score, 3);
    if (winner.empty()) return {false, (a ? "both candidates agree; " : "no candidate agrees; ") + detail};
    return {true, winner + " wins; " + detail};
}

Verdict criterion_gain(int workers, const fs::path& dir) {
    std::string detail;
    bool pass = true;
    std::string winners[2];
    const double sigmas[2] = {0.5, 2.0};
    for (int s = 0; s < 2; ++s) {
        auto c = base_config(s == 0 ? "c5_gain_sigma0.5" : "c5_gain_sigma2", dir, workers);
        c.run.spec.sigma = sigmas[s];
        c.run.n_paths = 100000;
        c.run.n_steps = 2000;
        const auto o = run("compare", c);
        detail += (s ? "; " : "") + std::string("sigma ") + fmt(sigmas[s]) + ": ";
        if (o.exit_code != kOk) {
            pass = false;
            detail += o.message;
            continue;
        }
        const auto* rs = find_row(o, "gain_residual", "gain:sigma_inv_plus_one");
        const auto* r2 = find_row(o, "gain_residual", "gain:two");
        const auto* g = find_row(o, "gain", "vf:theorem+gain:two");
        const bool a = within(*rs), b = within(*r2);
        winners[s] = a != b ? (a ? "sigma_inv_plus_one" : "two") : "";
        const bool positive = g->mean - kZ * g->se > 0.0;
        pass = pass && !winners[s].empty() && positive;
        detail += "gain " + fmt(g->mean) + " +- " + fmt(g->se, 3) + ", z(1/sigma+1) = " + fmt(rs->z_score, 3) +
                  ", z(2) = " + fmt(r2->z_score, 3) + (winners[s].empty() ? ", no single winner" : ", winner " + winners[s]) +
                  (positive ? "" : ", CI does not exclude 0");
    }
    if (pass && winners[0] != winners[1]) {
        pass = false;
        detail += "; winners differ between sigma values";
    }
    return {pass, detail};
}

Verdict criterion_optimality(int workers, const fs::path& dir) {
    auto c = base_config("c6_optimality", dir, workers);
    c.run.n_paths = 100000;
    c.run.n_steps = 100;
    c.optimize.grid_steps = 41;
    c.optimize.epsilon = 0.05;
    const auto o = run("optimize", c);
    const auto* p1 = find_row(o, "argmax_pi1", "alpha1");
    const auto* p2 = find_row(o, "argmax_pi2", "alpha2");
    if (!p1 || !p2) return {false, o.message};
    const bool near = std::abs(p1->mean - p1->closed_form_value) <= p1->se &&
                      std::abs(p2->mean - p2->closed_form_value) <= p2->se;
    std::string detail = "argmax (" + fmt(p1->mean, 4) + ", " + fmt(p2->mean, 4) + ") vs alpha (" +
                         fmt(p1->closed_form_value, 4) + ", " + fmt(p2->closed_form_value, 4) + "), cell " +
                         fmt(p1->se, 3) + (near ? ", within one cell" : ", not within one cell");
    bool stationary = false;
    const auto& st = o.details["stationarity"];
    if (st.contains("all_pass")) {
        stationary = st["all_pass"].get<bool>();
        int ok = 0;
        for (const auto& p : st["perturbations"]) ok += p["pass"].get<bool>();
        detail += "; stationarity " + std::to_string(ok) + "/8 directions pass";
    } else {
        detail += "; stationarity aborted: " + st.value("error", o.message);
    }
    return {near && stationary, detail};
}

Verdict criterion_convergence(int workers, const fs::path& dir) {
    const std::string winner = g_vf_winner[workers];
    const int steps[3] = {1000, 2000, 4000};
    double dev[3], se[3], dev_jump[3];
    for (int i = 0; i < 3; ++i) {
        auto c = base_config("c7_steps" + std::to_string(steps[i]), dir, workers);
        c.run.n_paths = 100000;
        c.run.n_steps = steps[i];
        const auto o = run("estimate", c);
        if (o.exit_code != kOk) return {false, o.message};
        const auto* je = find_row(o, "v_ordinary", "diag:jump_exact");
        const auto* w = winner.empty() ? nullptr : find_row(o, "v_ordinary", winner);
        se[i] = je->se;
        dev_jump[i] = std::abs(je->mean - je->closed_form_value);
        dev[i] = w ? std::abs(w->mean - w->closed_form_value) : NAN;
    }
    std::string diag = "diagnostic |MC - jump-exact| = " + fmt(dev_jump[0], 3) + ", " + fmt(dev_jump[1], 3) + ", " +
                       fmt(dev_jump[2], 3) + " (se " + fmt(se[0], 3) + ")";
    if (winner.empty()) return {false, "no winning closed form from criterion 4; " + diag};
    bool ok = true;
    for (int i = 0; i + 1 < 3; ++i) ok = ok && dev[i + 1] <= dev[i] + 2.0 * std::hypot(se[i], se[i + 1]);
    return {ok, "deviation from " + winner + " = " + fmt(dev[0], 3) + ", " + fmt(dev[1], 3) + ", " + fmt(dev[2], 3) +
                    "; " + diag};
}

std::vector<fs::path> files_under(const fs::path& root) {
    std::vector<fs::path> out;
    if (!fs::exists(root)) return out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
    std::sort(out.begin(), out.end());
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
    std::error_code ec;
    fs::remove_all(root, ec);

    const std::vector<Criterion> criteria = {
        {1, "filtration lab (exact, rational)", 60, criterion_lab},
        {2, "density normalization and unit mean", 60, criterion_density},
        {3, "information drift oracle", 120, criterion_drift},
        {4, "V_F triage", 300, criterion_vf},
        {5, "gain triage", 600, criterion_gain},
        {6, "optimality of alpha and stationarity of pi_ins", 600, criterion_optimality},
        {7, "discretization convergence", 600, criterion_convergence},
    };

    int failures = 0;
    for (int workers : {8, 1}) {
        const fs::path dir = root / ("workers" + std::to_string(workers));
        fs::create_directories(dir);
        for (const auto& c : criteria) {
            const auto start = std::chrono::steady_clock::now();
            Verdict v;
            try {
                v = c.run(workers, dir / ("c" + std::to_string(c.id)));
            } catch (const std::exception& e) {
                v = {false, std::string("error: ") + e.what()};
            }
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (workers != 8) continue;  // second pass only feeds criterion 8
            const bool in_time = secs < c.budget_s;
            const bool pass = v.pass && in_time;
            failures += !pass;
            std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << v.detail
                      << " [" << fmt(secs, 3) << " s, budget " << fmt(c.budget_s) << " s"
                      << (in_time ? "" : ", over budget") << "]" << std::endl;
        }
    }

    const auto a = files_under(root / "workers8");
    const auto b = files_under(root / "workers1");
    std::size_t same = 0;
    std::string first_diff;
    for (const auto& f : a) {
        const bool match = std::find(b.begin(), b.end(), f) != b.end() &&
                           slurp(root / "workers8" / f) == slurp(root / "workers1" / f);
        same += match;
        if (!match && first_diff.empty()) first_diff = f.string();
    }
    const bool repro = !a.empty() && a.size() == b.size() && same == a.size();
    failures += !repro;
    std::cout << (repro ? "PASS" : "FAIL") << " criterion 8 (reproducibility, 8 vs 1 workers): " << same << "/"
              << a.size() << " result files byte-identical" << (first_diff.empty() ? "" : ", first difference " + first_diff)
              << std::endl;
    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
    return failures == 0 ? 0 : 1;
}
