#include "markedtime/lab/suite.hpp"

#include <map>
#include <random>

#include "markedtime/estimator.hpp"
#include "markedtime/lab/checks.hpp"
#include "markedtime/rng.hpp"

namespace markedtime::lab {

namespace {

// q and walk scale choices keep the rationals small
const int kQ[][2] = {{0, 1}, {1, 4}, {1, 3}, {1, 2}, {2, 5}};
const int kScale[][2] = {{1, 1}, {1, 2}, {2, 1}, {3, 2}};

template <class T>
T fraction(int num, int den) {
    if constexpr (std::is_same_v<T, double>) {
        return static_cast<double>(num) / den;
    } else {
        Rational r(num, den);
        r.canonicalize();  // GMP compares canonical forms only
        return r;
    }
}

// exact for rationals, within kDoubleTolerance for doubles
template <class T>
bool same(const T& a, const T& b) {
    if constexpr (std::is_same_v<T, double>)
        return std::abs(a - b) <= kDoubleTolerance;
    else
        return a == b;
}

int kernel_weight(std::uint64_t seed, const Path& path, int x) {
    const std::uint64_t h = mix_seed(seed, (std::uint64_t{path.walk} << 40) ^ (std::uint64_t{path.jumps} << 8) ^ x);
    return 1 + static_cast<int>(h % 4);
}

struct Aggregate {
    int runs = 0;
    int passed = 0;
    double max_residual = 0.0;
    bool exact_zero = true;
    std::string first_failure;
};

struct Event {
    std::string name;
    bool pass;
    double residual;
    bool exact;
    std::string where;
};

class Recorder {
public:
    void merge(const Recorder& other) {
        for (const auto& e : other.events_) add(e.name, e.pass, e.residual, e.exact, e.where);
    }

    void add(const std::string& name, bool pass, double residual, bool exact, const std::string& where) {
        events_.push_back({name, pass, residual, exact, where});
        auto it = index_.find(name);
        if (it == index_.end()) {
            it = index_.emplace(name, entries_.size()).first;
            entries_.push_back({name, {}});
        }
        Aggregate& a = entries_[it->second].second;
        ++a.runs;
        if (pass) ++a.passed;
        a.max_residual = std::max(a.max_residual, residual);
        a.exact_zero = a.exact_zero && exact;
        if (!pass && a.first_failure.empty()) a.first_failure = where;
        if (!pass && first_failure_.empty()) first_failure_ = name + ": " + where;
    }
    void add(const CheckResult& r, const std::string& where) {
        add(r.name, r.pass, r.residual, r.exact_zero, where + (r.detail.empty() ? "" : " (" + r.detail + ")"));
    }

    nlohmann::ordered_json to_json() const {
        auto out = nlohmann::ordered_json::array();
        for (const auto& [name, a] : entries_) {
            nlohmann::ordered_json j;
            j["name"] = name;
            j["runs"] = a.runs;
            j["passed"] = a.passed;
            j["max_residual"] = a.max_residual;
            j["exact_zero"] = a.exact_zero;
            j["pass"] = a.passed == a.runs;
            if (!a.first_failure.empty()) j["first_failure"] = a.first_failure;
            out.push_back(j);
        }
        return out;
    }
    bool all_pass() const {
        for (const auto& e : entries_)
            if (e.second.passed != e.second.runs) return false;
        return true;
    }
    const std::string& first_failure() const { return first_failure_; }

private:
    std::vector<std::pair<std::string, Aggregate>> entries_;
    std::map<std::string, std::size_t> index_;
    std::string first_failure_;
    std::vector<Event> events_;
};

template <class T>
void run_model_checks(const LatticeSpace<T>& space, std::uint64_t seed, const std::string& where, Recorder& rec) {
    std::mt19937_64 rng(seed);
    rec.add(check_density(space), where);
    rec.add(check_insider_measure(space), where);

    const auto walk = walk_martingale(space);
    const auto jumps = compensated_jumps(space);
    const auto m1 = random_martingale(space, rng);
    const auto m2 = random_martingale(space, rng);
    rec.add(check_q_preserves_martingales(space, {walk, jumps, m1}), where);
    rec.add(check_compensator(space), where);
    for (const auto* pair : {&walk, &jumps, &m1}) {
        rec.add(check_bracket(space, *pair, *pair), where);
        rec.add(check_bracket(space, *pair, m2), where);
    }
    for (const auto* m : {&walk, &jumps, &m1}) {
        rec.add(decomposition_check(space, *m).result, where);
        const auto st = decomposition_check(space, stopped(space, *m));
        rec.add("decomposition_stopped", st.result.pass && st.max_abs_correction == 0.0, st.max_abs_correction,
                st.max_abs_correction == 0.0, where);
    }

    for (bool corollary : {false, true}) {
        const char* name = corollary ? "martingale_criterion_corollary" : "martingale_criterion";
        const auto report = martingale_criterion_check(space, admissible_criterion_input(space, rng, corollary), corollary);
        rec.add(name, report.conditions_hold && report.conclusion_holds,
                std::max(report.condition_residual, report.conclusion_residual),
                report.condition_residual == 0.0 && report.conclusion_residual == 0.0,
                where + (report.conditions_hold ? " (conclusion fails)" : " (generated input breaks the conditions)"));
        const auto loose = martingale_criterion_check(space, random_criterion_input(space, rng), corollary);
        rec.add("martingale_criterion_implication", loose.consistent(), 0.0, true,
                where + " (conditions hold but the conclusion fails)");
    }

    const std::uint64_t alpha_seed = rng();
    for (auto s : {LabStrategy::zero, LabStrategy::ordinary, LabStrategy::random, LabStrategy::unit_asset_1,
                   LabStrategy::unit_asset_2}) {
        auto r = deflated_wealth_check(space, s, false, alpha_seed);
        r.name = "deflated_wealth";
        rec.add(r, where);
    }
    for (auto s : {LabStrategy::zero, LabStrategy::ordinary, LabStrategy::insider, LabStrategy::random,
                   LabStrategy::unit_asset_1, LabStrategy::unit_asset_2}) {
        auto r = deflated_wealth_check(space, s, true, alpha_seed);
        r.name = "deflated_wealth";
        rec.add(r, where);
    }

    const auto f = predictable_form_check(space, sample_predictable(space, PredictableSample::f_predictable, rng));
    rec.add("predictable_form", f.measurable && f.roundtrip_exact && f.mark_independent, f.roundtrip_residual,
            f.roundtrip_exact, where + " (F-predictable input)");
    const auto g = predictable_form_check(space, sample_predictable(space, PredictableSample::post_default_mark, rng));
    rec.add("predictable_form", g.measurable && g.roundtrip_exact, g.roundtrip_residual, g.roundtrip_exact,
            where + " (post-default mark input)");
    if (space.marks() >= 2) {
        const auto b = predictable_form_check(space, sample_predictable(space, PredictableSample::pre_default_mark, rng));
        rec.add("predictable_form", !b.measurable, 0.0, true, where + " (pre-default mark input accepted)");
    }
}

template <class T>
void run_examples(Recorder& rec) {
    {
        LatticeSpace<T> space(one_step_example<T>());
        const bool ok = space.n_atoms() == 4 && same<T>(space.eta(0), fraction<T>(11, 20)) &&
                        same<T>(space.density(1, 1, 0), fraction<T>(16, 11)) &&
                        same<T>(space.density(1, 0, 0), fraction<T>(6, 11));
        rec.add("example_one_step_density", ok, 0.0, true, "eta or p_1 differs from 11/20, 16/11, 6/11");
        const auto q = insider_measure(space);
        T total(0);
        for (const auto& v : q) total += v;
        rec.add("example_one_step_insider_mass", same<T>(total, T(1)), to_double<T>(abs_value<T>(T(total - T(1)))),
                total == T(1), "Q mass");
    }
    {
        LatticeModel<T> m;
        m.n_steps = 3;
        m.n_marks = 3;
        m.jump_probability = fraction<T>(1, 3);
        m.tau = {TauKind::hybrid, 1, 1};
        m.kernel = [](const Path&) { return std::vector<T>{fraction<T>(1, 2), fraction<T>(1, 3), fraction<T>(1, 6)}; };
        LatticeSpace<T> space(m);
        bool flat = true;
        for (int t = 0; t <= space.n(); ++t)
            for (std::size_t i = 0; i < space.n_paths(); ++i)
                for (int x = 0; x < space.marks(); ++x) flat = flat && same<T>(space.density(t, i, x), T(1));
        const auto q = insider_measure(space);
        bool q_equal = true;
        for (std::size_t a = 0; a < space.n_atoms(); ++a) q_equal = q_equal && same<T>(q[a], space.atom_prob(a));
        const auto d = decomposition_check(space, walk_martingale(space));
        rec.add("example_independent_mark", flat && q_equal && d.max_abs_correction <= kDoubleTolerance, d.max_abs_correction,
                d.max_abs_correction == 0.0, "p, Q or the correction is not trivial");
    }
    {
        LatticeModel<T> m;
        m.n_steps = 4;
        m.jump_probability = fraction<T>(1, 4);
        m.tau = {TauKind::deterministic, 2, 1};
        m.kernel = [](const Path& p) {
            return p.walk & 1u ? std::vector<T>{fraction<T>(1, 4), fraction<T>(3, 4)}
                               : std::vector<T>{fraction<T>(2, 3), fraction<T>(1, 3)};
        };
        LatticeSpace<T> space(m);
        const auto c = compensator(space);
        bool equal = true;
        for (int t = 0; t <= space.n(); ++t)
            for (std::size_t i = 0; i < space.n_paths(); ++i) equal = equal && same<T>(c.Lambda[t][i], c.D[t][i]);
        rec.add("example_deterministic_tau", equal, 0.0, true, "Lambda differs from D");

        m.tau = {TauKind::first_jump, 1, 1};
        LatticeSpace<T> jumps(m);
        const auto cj = compensator(jumps);
        bool hazard = true;
        for (int s = 1; s <= jumps.n(); ++s)
            for (std::size_t i = 0; i < jumps.n_paths(); ++i) {
                const T expected = jumps.tau(i) >= s ? fraction<T>(1, 4) : T(0);
                hazard = hazard && same<T>(T(cj.Lambda[s][i] - cj.Lambda[s - 1][i]), expected);
            }
        rec.add("example_first_jump_hazard", hazard, 0.0, true, "Lambda increments differ from q 1{tau>=s}");

        const auto w = walk_martingale(space);
        const auto br = discrete_bracket(space, w, w);
        const auto cross = discrete_bracket(space, w, compensated_jumps(space));
        bool linear = true;
        for (int t = 0; t <= space.n(); ++t)
            for (std::size_t i = 0; i < space.n_paths(); ++i)
                linear = linear && same<T>(br[t][i], T(T(t) * m.scale * m.scale)) && same<T>(cross[t][i], T(0));
        rec.add("example_walk_bracket", linear, 0.0, true, "<W,W>_t != s^2 t or <W,J> != 0");
    }
    {
        auto m = one_step_example<T>();
        m.kernel = [](const Path& p) {
            return p.walk & 1u ? std::vector<T>{T(1), T(0)} : std::vector<T>{fraction<T>(3, 10), fraction<T>(7, 10)};
        };
        bool rejected = false;
        try {
            LatticeSpace<T> strict(m);
        } catch (const LatticeError& e) {
            rejected = std::string(e.what()) == "mark kernel not strictly positive";
        }
        LatticeSpace<T> loose(m, false);
        const auto r = check_insider_measure(loose);
        const bool mass_breaks = r.detail.find("mass") != std::string::npos;
        rec.add("example_zero_kernel", rejected && mass_breaks, 0.0, true,
                "zero kernel entry not rejected or Q mass conserved");
    }
}

std::string describe(const RandomModelParams& p, int index) {
    return "model " + std::to_string(index) + " (steps " + std::to_string(p.n_steps) + ", marks " +
           std::to_string(p.n_marks) + ", q " + std::to_string(kQ[p.q_index][0]) + "/" +
           std::to_string(kQ[p.q_index][1]) + ", " +
           (p.jump_mode == JumpMode::at_most_one ? "at_most_one" : "unrestricted") + ", tau " + p.tau.describe() +
           ")";
}

template <class T>
LabSuiteResult run_typed(const LabSuiteOptions& options) {
    // models run concurrently into their own recorders, merged in index order
    std::vector<Recorder> per_model(options.n_models);
    std::vector<std::string> names(options.n_models);
    parallel_for(options.n_models, options.workers, [&](std::int64_t m) {
        const std::uint64_t model_seed = mix_seed(options.seed, static_cast<std::uint64_t>(m));
        RandomModelParams params = random_model_params(model_seed, options.max_steps, options.max_marks);
        if (options.zero_kernel_entry && m == 0) params.zero_kernel_entry = true;
        const std::string where = describe(params, static_cast<int>(m));
        names[m] = where;
        try {
            LatticeSpace<T> space(make_model<T>(params));
            run_model_checks(space, model_seed, where, per_model[m]);
        } catch (const std::exception& e) {
            per_model[m].add("model_construction", false, 0.0, true, where + ": " + e.what());
        }
    });
    Recorder rec;
    nlohmann::ordered_json models = nlohmann::ordered_json::array();
    for (int m = 0; m < options.n_models; ++m) {
        rec.merge(per_model[m]);
        models.push_back(names[m]);
    }
    try {
        run_examples<T>(rec);
    } catch (const std::exception& e) {
        rec.add("examples", false, 0.0, true, e.what());
    }

    LabSuiteResult out;
    out.all_pass = rec.all_pass();
    out.first_failure = rec.first_failure();
    out.manifest["suite"] = "filtration_lab";
    out.manifest["arithmetic"] = options.rational ? "rational" : "double";
    out.manifest["seed"] = options.seed;
    out.manifest["n_models"] = options.n_models;
    out.manifest["max_steps"] = options.max_steps;
    out.manifest["max_marks"] = options.max_marks;
    out.manifest["all_pass"] = out.all_pass;
    if (!out.all_pass) out.manifest["first_failure"] = out.first_failure;
    out.manifest["checks"] = rec.to_json();
    out.manifest["models"] = models;
    return out;
}

}  // namespace

RandomModelParams random_model_params(std::uint64_t seed, int max_steps, int max_marks) {
    std::mt19937_64 rng(seed);
    RandomModelParams p;
    p.n_steps = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, max_steps)));
    p.n_marks = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, max_marks - 1)));
    p.n_marks = std::min(p.n_marks, std::max(1, max_marks));
    p.q_index = static_cast<int>(rng() % 5);
    p.scale_index = static_cast<int>(rng() % 4);
    // unrestricted jumps square the path count; keep them to short models
    p.jump_mode = (p.n_steps <= 4 && rng() % 2 == 0) ? JumpMode::unrestricted : JumpMode::at_most_one;
    const int kinds = static_cast<int>(rng() % 5);
    p.tau.kind = static_cast<TauKind>(kinds);
    p.tau.time = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(p.n_steps));
    p.tau.level = 1 + static_cast<int>(rng() % 2);
    p.kernel_seed = rng();
    return p;
}

template <class T>
LatticeModel<T> make_model(const RandomModelParams& params) {
    LatticeModel<T> m;
    m.n_steps = params.n_steps;
    m.n_marks = params.n_marks;
    m.jump_probability = fraction<T>(kQ[params.q_index][0], kQ[params.q_index][1]);
    m.scale = fraction<T>(kScale[params.scale_index][0], kScale[params.scale_index][1]);
    m.jump_mode = params.jump_mode;
    m.tau = params.tau;
    const std::uint64_t seed = params.kernel_seed;
    const int marks = params.n_marks;
    const bool zero = params.zero_kernel_entry;
    m.kernel = [seed, marks, zero](const Path& path) {
        std::vector<int> w(marks);
        int total = 0;
        for (int x = 0; x < marks; ++x) total += (w[x] = kernel_weight(seed, path, x));
        if (zero && path.walk == 0 && path.jumps == 0) {
            total -= w[0];
            w[0] = 0;
        }
        std::vector<T> row(marks);
        for (int x = 0; x < marks; ++x) row[x] = fraction<T>(w[x], total);
        return row;
    };
    return m;
}

template <class T>
LatticeModel<T> one_step_example() {
    LatticeModel<T> m;
    m.n_steps = 1;
    m.n_marks = 2;
    m.jump_probability = T(0);
    m.tau = {TauKind::walk_hit, 1, 1};
    m.kernel = [](const Path& p) {
        return p.walk & 1u ? std::vector<T>{fraction<T>(4, 5), fraction<T>(1, 5)}
                           : std::vector<T>{fraction<T>(3, 10), fraction<T>(7, 10)};
    };
    return m;
}

LabSuiteResult run_lab_suite(const LabSuiteOptions& options) {
    return options.rational ? run_typed<Rational>(options) : run_typed<double>(options);
}

template LatticeModel<Rational> make_model<Rational>(const RandomModelParams&);
template LatticeModel<double> make_model<double>(const RandomModelParams&);
template LatticeModel<Rational> one_step_example<Rational>();
template LatticeModel<double> one_step_example<double>();

}  // namespace markedtime::lab
