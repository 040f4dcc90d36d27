#include "markedtime/lab/checks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace markedtime::lab {

namespace {

template <class T>
struct MaxAbs {
    T value = T(0);
    void add(const T& d) {
        T a = abs_value<T>(d);
        if (a > value) value = a;
    }
};

int small_int(std::mt19937_64& rng, int lo = -3, int hi = 3) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

template <class T>
std::vector<T> random_per_group(const std::vector<int>& group, int groups, std::mt19937_64& rng) {
    std::vector<T> by_group(groups);
    for (auto& v : by_group) v = T(small_int(rng));
    std::vector<T> out(group.size());
    for (std::size_t i = 0; i < group.size(); ++i) out[i] = by_group[group[i]];
    return out;
}

template <class T>
std::vector<T> atoms_from_paths(const LatticeSpace<T>& space, const std::vector<T>& values) {
    std::vector<T> out(space.n_atoms());
    for (std::size_t a = 0; a < space.n_atoms(); ++a) out[a] = values[space.atom_path(a)];
    return out;
}

template <class T>
T g_martingale_residual(const LatticeSpace<T>& space, const AtomProcess<T>& x, const std::vector<T>& probs) {
    MaxAbs<T> r;
    for (int t = 0; t < space.n(); ++t) {
        const auto cond = space.g_cond(x[t + 1], t, probs);
        for (std::size_t a = 0; a < space.n_atoms(); ++a)
            if (probs[a] != T(0)) r.add(T(cond[a] - x[t][a]));
    }
    return r.value;
}

template <class T>
bool nonzero(const T& v) {
    if constexpr (std::is_same_v<T, double>)
        return std::abs(v) > kDoubleTolerance;
    else
        return v != 0;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : ", ") + p;
    return out;
}

}  // namespace

template <class T>
CheckResult make_result(std::string name, const T& residual, std::string detail) {
    CheckResult out;
    out.name = std::move(name);
    out.residual = to_double<T>(residual);
    out.exact_zero = residual == T(0);
    if constexpr (std::is_same_v<T, double>)
        out.pass = residual <= kDoubleTolerance;
    else
        out.pass = out.exact_zero;
    out.detail = std::move(detail);
    return out;
}

template <class T>
PathProcess<T> walk_martingale(const LatticeSpace<T>& space) {
    PathProcess<T> x(space.n() + 1, std::vector<T>(space.n_paths(), T(0)));
    for (int t = 1; t <= space.n(); ++t)
        for (std::size_t i = 0; i < space.n_paths(); ++i)
            x[t][i] = x[t - 1][i] + space.model().scale * T(space.walk_step(i, t));
    return x;
}

template <class T>
PathProcess<T> compensated_jumps(const LatticeSpace<T>& space) {
    PathProcess<T> x(space.n() + 1, std::vector<T>(space.n_paths(), T(0)));
    std::vector<T> jump(space.n_paths());
    for (int t = 1; t <= space.n(); ++t) {
        for (std::size_t i = 0; i < space.n_paths(); ++i) jump[i] = T(space.jump_at(i, t));
        const auto hazard = space.f_cond(jump, t - 1);
        for (std::size_t i = 0; i < space.n_paths(); ++i) x[t][i] = x[t - 1][i] + jump[i] - hazard[i];
    }
    return x;
}

template <class T>
PathProcess<T> random_martingale(const LatticeSpace<T>& space, std::mt19937_64& rng) {
    std::vector<T> terminal(space.n_paths());
    for (auto& v : terminal) v = T(small_int(rng));
    PathProcess<T> x(space.n() + 1);
    for (int t = 0; t <= space.n(); ++t) x[t] = t == space.n() ? terminal : space.f_cond(terminal, t);
    return x;
}

template <class T>
PathProcess<T> random_predictable(const LatticeSpace<T>& space, std::mt19937_64& rng) {
    PathProcess<T> x(space.n() + 1, std::vector<T>(space.n_paths(), T(0)));
    for (int t = 1; t <= space.n(); ++t) x[t] = random_per_group<T>(space.f_group(t - 1), space.f_groups(t - 1), rng);
    return x;
}

template <class T>
PathProcess<T> stopped(const LatticeSpace<T>& space, const PathProcess<T>& x) {
    PathProcess<T> out = x;
    for (int t = 0; t <= space.n(); ++t)
        for (std::size_t i = 0; i < space.n_paths(); ++i) out[t][i] = x[std::min(t, space.tau(i))][i];
    return out;
}

template <class T>
T martingale_residual(const LatticeSpace<T>& space, const PathProcess<T>& x) {
    MaxAbs<T> r;
    for (int t = 0; t < space.n(); ++t) {
        const auto cond = space.f_cond(x[t + 1], t);
        for (std::size_t i = 0; i < space.n_paths(); ++i) r.add(T(cond[i] - x[t][i]));
    }
    return r.value;
}

template <class T>
CheckResult check_density(const LatticeSpace<T>& space) {
    MaxAbs<T> mart, norm, start;
    bool positive = true;
    const int E = space.marks();
    std::vector<T> next(space.n_paths());
    for (int t = 0; t <= space.n(); ++t) {
        for (std::size_t i = 0; i < space.n_paths(); ++i) {
            T total(0);
            for (int x = 0; x < E; ++x) {
                total += space.density(t, i, x) * space.eta(x);
                if (!(space.density(t, i, x) > T(0))) positive = false;
                if (t == 0) start.add(T(space.density(0, i, x) - T(1)));
            }
            norm.add(T(total - T(1)));
        }
        if (t == space.n()) break;
        for (int x = 0; x < E; ++x) {
            for (std::size_t i = 0; i < space.n_paths(); ++i) next[i] = space.density(t + 1, i, x);
            const auto cond = space.f_cond(next, t);
            for (std::size_t i = 0; i < space.n_paths(); ++i) mart.add(T(cond[i] - space.density(t, i, x)));
        }
    }
    T worst = std::max({mart.value, norm.value, start.value});
    std::vector<std::string> bad;
    if (nonzero(mart.value)) bad.push_back("martingale");
    if (nonzero(norm.value)) bad.push_back("normalization");
    if (nonzero(start.value)) bad.push_back("p_0 = 1");
    auto out = make_result<T>("density_martingale", worst, join(bad));
    if (!positive) {
        out.pass = false;
        out.detail = join(bad) + (bad.empty() ? "" : ", ") + "density not strictly positive";
    }
    return out;
}

template <class T>
std::vector<T> insider_measure(const LatticeSpace<T>& space) {
    std::vector<T> q(space.n_atoms(), T(0));
    for (std::size_t a = 0; a < space.n_atoms(); ++a) {
        const T& p = space.atom_prob(a);
        if (p == T(0)) continue;
        q[a] = p / space.density(space.n(), space.atom_path(a), space.atom_mark(a));
    }
    return q;
}

template <class T>
CheckResult check_insider_measure(const LatticeSpace<T>& space) {
    const auto q = insider_measure(space);
    const int E = space.marks();
    MaxAbs<T> mass, paths, marks, indep, rn;

    T total(0);
    std::vector<T> q_path(space.n_paths(), T(0)), q_mark(E, T(0));
    for (std::size_t a = 0; a < space.n_atoms(); ++a) {
        total += q[a];
        q_path[space.atom_path(a)] += q[a];
        q_mark[space.atom_mark(a)] += q[a];
    }
    mass.add(T(total - T(1)));
    for (std::size_t i = 0; i < space.n_paths(); ++i) paths.add(T(q_path[i] - space.path_prob(i)));
    for (int x = 0; x < E; ++x) marks.add(T(q_mark[x] - space.eta(x)));
    for (std::size_t a = 0; a < space.n_atoms(); ++a)
        indep.add(T(q[a] - q_path[space.atom_path(a)] * q_mark[space.atom_mark(a)]));

    std::vector<T> rn_density(space.n_atoms(), T(0));
    for (std::size_t a = 0; a < space.n_atoms(); ++a)
        if (space.atom_prob(a) != T(0)) rn_density[a] = q[a] / space.atom_prob(a);
    for (int t = 0; t <= space.n(); ++t) {
        const auto cond = space.g_cond(rn_density, t, space.atom_probs());
        for (std::size_t a = 0; a < space.n_atoms(); ++a) {
            if (space.atom_prob(a) == T(0)) continue;
            const std::size_t i = space.atom_path(a);
            const T expected = space.tau(i) > t ? T(1) : T(T(1) / space.density(t, i, space.atom_mark(a)));
            rn.add(T(cond[a] - expected));
        }
    }
    std::vector<std::string> bad;
    if (nonzero(mass.value)) bad.push_back("mass");
    if (nonzero(paths.value)) bad.push_back("path marginal");
    if (nonzero(marks.value)) bad.push_back("mark law");
    if (nonzero(indep.value)) bad.push_back("independence");
    if (nonzero(rn.value)) bad.push_back("rn form");
    return make_result<T>("insider_measure", std::max({mass.value, paths.value, marks.value, indep.value, rn.value}),
                          join(bad));
}

template <class T>
CheckResult check_q_preserves_martingales(const LatticeSpace<T>& space,
                                          const std::vector<PathProcess<T>>& martingales) {
    const auto q = insider_measure(space);
    T worst(0);
    for (const auto& m : martingales) {
        AtomProcess<T> atoms(space.n() + 1);
        for (int t = 0; t <= space.n(); ++t) atoms[t] = atoms_from_paths(space, m[t]);
        worst = std::max(worst, g_martingale_residual(space, atoms, q));
    }
    return make_result<T>("q_preserves_f_martingales", worst);
}

template <class T>
Compensator<T> compensator(const LatticeSpace<T>& space) {
    const std::size_t P = space.n_paths();
    Compensator<T> c;
    c.D.assign(space.n() + 1, std::vector<T>(P, T(0)));
    c.Lambda = c.D;
    c.N = c.D;
    std::vector<T> hit(P);
    for (int s = 1; s <= space.n(); ++s) {
        for (std::size_t i = 0; i < P; ++i) hit[i] = T(space.tau(i) == s ? 1 : 0);
        const auto hazard = space.f_cond(hit, s - 1);
        for (std::size_t i = 0; i < P; ++i) {
            c.D[s][i] = T(space.tau(i) <= s ? 1 : 0);
            c.Lambda[s][i] = c.Lambda[s - 1][i] + (space.tau(i) >= s ? hazard[i] : T(0));
            c.N[s][i] = c.D[s][i] - c.Lambda[s][i];
        }
    }
    return c;
}

template <class T>
CheckResult check_compensator(const LatticeSpace<T>& space) {
    std::vector<std::string> bad;
    for (int t = 0; t <= space.n(); ++t) {
        std::vector<T> d(space.n_paths());
        for (std::size_t i = 0; i < space.n_paths(); ++i) d[i] = T(space.tau(i) <= t ? 1 : 0);
        if (!space.f_measurable(d, t)) {
            bad.push_back("tau is not a stopping time");
            break;
        }
    }
    const auto c = compensator(space);
    T worst = martingale_residual(space, c.N);
    if (nonzero(worst)) bad.push_back("N not a martingale");
    for (int t = 1; t <= space.n(); ++t)
        if (!space.f_measurable(c.Lambda[t], t - 1)) {
            bad.push_back("Lambda not predictable");
            break;
        }
    if (space.model().tau.kind == TauKind::deterministic || space.model().tau.kind == TauKind::never) {
        MaxAbs<T> diff;
        for (int t = 0; t <= space.n(); ++t)
            for (std::size_t i = 0; i < space.n_paths(); ++i) diff.add(T(c.Lambda[t][i] - c.D[t][i]));
        if (nonzero(diff.value)) bad.push_back("Lambda != D for a predictable tau");
        worst = std::max(worst, diff.value);
    }
    auto out = make_result<T>("compensator", worst, join(bad));
    if (!bad.empty()) out.pass = false;
    return out;
}

template <class T>
PathProcess<T> discrete_bracket(const LatticeSpace<T>& space, const PathProcess<T>& a, const PathProcess<T>& b) {
    PathProcess<T> out(space.n() + 1, std::vector<T>(space.n_paths(), T(0)));
    std::vector<T> prod(space.n_paths());
    for (int s = 1; s <= space.n(); ++s) {
        for (std::size_t i = 0; i < space.n_paths(); ++i) prod[i] = (a[s][i] - a[s - 1][i]) * (b[s][i] - b[s - 1][i]);
        const auto cond = space.f_cond(prod, s - 1);
        for (std::size_t i = 0; i < space.n_paths(); ++i) out[s][i] = out[s - 1][i] + cond[i];
    }
    return out;
}

template <class T>
CheckResult check_bracket(const LatticeSpace<T>& space, const PathProcess<T>& a, const PathProcess<T>& b) {
    const auto br = discrete_bracket(space, a, b);
    std::vector<std::string> bad;
    for (int t = 1; t <= space.n(); ++t)
        if (!space.f_measurable(br[t], t - 1)) {
            bad.push_back("bracket not predictable");
            break;
        }
    PathProcess<T> diff = br;
    for (int t = 0; t <= space.n(); ++t)
        for (std::size_t i = 0; i < space.n_paths(); ++i) diff[t][i] = a[t][i] * b[t][i] - br[t][i];
    const T base = a[0][0] * b[0][0];
    T worst = martingale_residual(space, diff);
    if (nonzero(worst)) bad.push_back("AB - <A,B> not a martingale");
    for (std::size_t i = 0; i < space.n_paths(); ++i)
        if (diff[0][i] != base) bad.push_back("bracket does not start at 0");
    auto out = make_result<T>("bracket", worst, join(bad));
    if (!bad.empty()) out.pass = false;
    return out;
}

template <class T>
DecompositionReport<T> decomposition_check(const LatticeSpace<T>& space, const PathProcess<T>& m) {
    const int n = space.n();
    const int E = space.marks();
    const std::size_t P = space.n_paths();
    AtomProcess<T> corr(n + 1, std::vector<T>(space.n_atoms(), T(0)));
    std::vector<T> prod(P);
    for (int s = 1; s <= n; ++s) {
        for (int x = 0; x < E; ++x) {
            for (std::size_t i = 0; i < P; ++i)
                prod[i] = (m[s][i] - m[s - 1][i]) * (space.density(s, i, x) - space.density(s - 1, i, x));
            const auto cond = space.f_cond(prod, s - 1);
            for (std::size_t i = 0; i < P; ++i) {
                const std::size_t a = i * E + x;
                corr[s][a] = corr[s - 1][a];
                if (space.tau(i) <= s - 1) corr[s][a] += cond[i] / space.density(s - 1, i, x);
            }
        }
    }
    AtomProcess<T> tilde(n + 1, std::vector<T>(space.n_atoms()));
    MaxAbs<T> before, overall;
    for (int t = 0; t <= n; ++t)
        for (std::size_t a = 0; a < space.n_atoms(); ++a) {
            const std::size_t i = space.atom_path(a);
            tilde[t][a] = m[t][i] - (space.tau(i) <= t ? corr[t][a] : T(0));
            overall.add(corr[t][a]);
            if (t <= space.tau(i)) before.add(corr[t][a]);
        }
    DecompositionReport<T> out;
    const T residual = g_martingale_residual(space, tilde, space.atom_probs());
    out.result = make_result<T>("decomposition", residual);
    if (nonzero(before.value)) {
        out.result.pass = false;
        out.result.detail = "correction nonzero before tau";
    }
    out.correction = std::move(corr);
    out.correction_before_tau = to_double<T>(before.value);
    out.max_abs_correction = to_double<T>(overall.value);
    return out;
}

namespace {

/// W(x) = Y(x) or Y(x) p(x), and H_t = sum_x eta(x) [sum_u W_{u-1}(x) dLambda_u + <N, W(x)>_t].
template <class T>
PathProcess<T> criterion_h(const LatticeSpace<T>& space, const std::vector<PathProcess<T>>& w,
                           const Compensator<T>& comp) {
    PathProcess<T> h(space.n() + 1, std::vector<T>(space.n_paths(), T(0)));
    for (int x = 0; x < space.marks(); ++x) {
        const auto br = discrete_bracket(space, comp.N, w[x]);
        for (int t = 0; t <= space.n(); ++t) {
            for (std::size_t i = 0; i < space.n_paths(); ++i) {
                T integral(0);
                for (int u = 1; u <= t; ++u) integral += w[x][u - 1][i] * (comp.Lambda[u][i] - comp.Lambda[u - 1][i]);
                h[t][i] += space.eta(x) * (integral + br[t][i]);
            }
        }
    }
    return h;
}

template <class T>
std::vector<PathProcess<T>> weighted(const LatticeSpace<T>& space, const std::vector<PathProcess<T>>& yx,
                                     bool corollary) {
    if (!corollary) return yx;
    auto w = yx;
    for (int x = 0; x < space.marks(); ++x)
        for (int t = 0; t <= space.n(); ++t)
            for (std::size_t i = 0; i < space.n_paths(); ++i) w[x][t][i] = yx[x][t][i] * space.density(t, i, x);
    return w;
}

}  // namespace

template <class T>
CriterionReport martingale_criterion_check(const LatticeSpace<T>& space, const CriterionInput<T>& input,
                                           bool corollary) {
    const auto comp = compensator(space);
    const auto w = weighted(space, input.yx, corollary);
    T cond(0);
    for (int x = 0; x < space.marks(); ++x) cond = std::max(cond, martingale_residual(space, w[x]));
    const auto h = criterion_h(space, w, comp);
    PathProcess<T> ytilde = h;
    for (int t = 0; t <= space.n(); ++t)
        for (std::size_t i = 0; i < space.n_paths(); ++i)
            if (space.tau(i) > t) ytilde[t][i] += input.y[t][i];
    cond = std::max(cond, martingale_residual(space, ytilde));

    AtomProcess<T> z(space.n() + 1, std::vector<T>(space.n_atoms()));
    for (int t = 0; t <= space.n(); ++t)
        for (std::size_t a = 0; a < space.n_atoms(); ++a) {
            const std::size_t i = space.atom_path(a);
            z[t][a] = space.tau(i) > t ? input.y[t][i] : input.yx[space.atom_mark(a)][t][i];
        }
    const std::vector<T> probs = corollary ? space.atom_probs() : insider_measure(space);
    const T concl = g_martingale_residual(space, z, probs);

    CriterionReport out;
    const CheckResult c1 = make_result<T>("conditions", cond);
    const CheckResult c2 = make_result<T>("conclusion", concl);
    out.conditions_hold = c1.pass;
    out.conclusion_holds = c2.pass;
    out.condition_residual = c1.residual;
    out.conclusion_residual = c2.residual;
    return out;
}

template <class T>
CriterionInput<T> admissible_criterion_input(const LatticeSpace<T>& space, std::mt19937_64& rng, bool corollary) {
    const int n = space.n();
    CriterionInput<T> in;
    std::vector<PathProcess<T>> w(space.marks());
    in.yx.resize(space.marks());
    for (int x = 0; x < space.marks(); ++x) {
        w[x] = random_martingale(space, rng);
        in.yx[x] = w[x];
        if (corollary)
            for (int t = 0; t <= n; ++t)
                for (std::size_t i = 0; i < space.n_paths(); ++i) in.yx[x][t][i] = w[x][t][i] / space.density(t, i, x);
    }
    const auto comp = compensator(space);
    const auto h = criterion_h(space, w, comp);
    std::vector<T> terminal = h[n];
    for (std::size_t i = 0; i < space.n_paths(); ++i)
        if (space.tau(i) > n) terminal[i] += T(small_int(rng));
    in.y.assign(n + 1, std::vector<T>(space.n_paths()));
    for (int t = 0; t <= n; ++t) {
        const auto closure = t == n ? terminal : space.f_cond(terminal, t);
        for (std::size_t i = 0; i < space.n_paths(); ++i)
            in.y[t][i] = space.tau(i) > t ? T(closure[i] - h[t][i]) : T(small_int(rng));
    }
    return in;
}

template <class T>
CriterionInput<T> random_criterion_input(const LatticeSpace<T>& space, std::mt19937_64& rng) {
    CriterionInput<T> in;
    in.y.assign(space.n() + 1, std::vector<T>(space.n_paths()));
    for (int t = 0; t <= space.n(); ++t) in.y[t] = random_per_group<T>(space.f_group(t), space.f_groups(t), rng);
    in.yx.resize(space.marks());
    for (auto& yx : in.yx) {
        yx.assign(space.n() + 1, {});
        for (int t = 0; t <= space.n(); ++t) yx[t] = random_per_group<T>(space.f_group(t), space.f_groups(t), rng);
    }
    return in;
}

namespace {

template <class T>
using V2 = std::array<T, 2>;

template <class T>
struct LatticeMarket {
    // index t = 1..n refers to step t; entry 0 unused
    std::vector<std::vector<V2<T>>> dM;        // [t][path]
    std::vector<std::vector<std::array<T, 3>>> bracket;  // [t][path] (b11, b12, b22), F_{t-1}-measurable
    std::vector<std::vector<V2<T>>> alpha;     // [t][path], F_{t-1}-measurable
};

template <class T>
LatticeMarket<T> build_market(const LatticeSpace<T>& space, std::uint64_t alpha_seed) {
    const int n = space.n();
    const std::size_t P = space.n_paths();
    const auto w = walk_martingale(space);
    const auto j = compensated_jumps(space);
    LatticeMarket<T> mk;
    mk.dM.assign(n + 1, std::vector<V2<T>>(P));
    mk.bracket.assign(n + 1, std::vector<std::array<T, 3>>(P));
    mk.alpha.assign(n + 1, std::vector<V2<T>>(P));
    std::mt19937_64 rng(alpha_seed);
    std::vector<T> p11(P), p12(P), p22(P);
    for (int t = 1; t <= n; ++t) {
        for (std::size_t i = 0; i < P; ++i) {
            mk.dM[t][i] = {T(w[t][i] - w[t - 1][i]), T(j[t][i] - j[t - 1][i])};
            p11[i] = mk.dM[t][i][0] * mk.dM[t][i][0];
            p12[i] = mk.dM[t][i][0] * mk.dM[t][i][1];
            p22[i] = mk.dM[t][i][1] * mk.dM[t][i][1];
        }
        const auto b11 = space.f_cond(p11, t - 1), b12 = space.f_cond(p12, t - 1), b22 = space.f_cond(p22, t - 1);
        const auto a1 = random_per_group<T>(space.f_group(t - 1), space.f_groups(t - 1), rng);
        const auto a2 = random_per_group<T>(space.f_group(t - 1), space.f_groups(t - 1), rng);
        for (std::size_t i = 0; i < P; ++i) {
            mk.bracket[t][i] = {b11[i], b12[i], b22[i]};
            mk.alpha[t][i] = {T(a1[i] / T(4)), T(a2[i] / T(4))};
        }
    }
    return mk;
}

template <class T>
V2<T> returns(const LatticeMarket<T>& mk, int t, std::size_t i) {
    const auto& b = mk.bracket[t][i];
    const auto& a = mk.alpha[t][i];
    return {T(mk.dM[t][i][0] + b[0] * a[0] + b[1] * a[1]), T(mk.dM[t][i][1] + b[1] * a[0] + b[2] * a[1])};
}

template <class T>
T dot2(const V2<T>& a, const V2<T>& b) {
    return a[0] * b[0] + a[1] * b[1];
}

/// Solves C theta = r for a symmetric PSD 2x2 C; components with zero
/// variance keep `fallback`.
template <class T>
V2<T> solve_cov(const std::array<T, 3>& c, const V2<T>& r, const V2<T>& fallback) {
    const T& a = c[0];
    const T& b = c[1];
    const T& d = c[2];
    if (a == T(0) && d == T(0)) return fallback;
    if (d == T(0)) return {T(r[0] / a), fallback[1]};
    if (a == T(0)) return {fallback[0], T(r[1] / d)};
    const T det = a * d - b * b;
    if (det == T(0)) throw std::runtime_error("deflated_wealth_check: singular conditional covariance");
    return {T((d * r[0] - b * r[1]) / det), T((a * r[1] - b * r[0]) / det)};
}

}  // namespace

template <class T>
CheckResult deflated_wealth_check(const LatticeSpace<T>& space, LabStrategy strategy, bool insider_filtration,
                                  std::uint64_t alpha_seed) {
    const int n = space.n();
    const int E = space.marks();
    const auto mk = build_market(space, alpha_seed);
    std::mt19937_64 rng(alpha_seed ^ 0x9E3779B97F4A7C15ull);
    std::string name = std::string("deflated_wealth_") + (insider_filtration ? "insider_" : "ordinary_");
    switch (strategy) {
        case LabStrategy::zero: name += "zero"; break;
        case LabStrategy::ordinary: name += "alpha"; break;
        case LabStrategy::insider: name += "theta"; break;
        case LabStrategy::random: name += "random"; break;
        case LabStrategy::unit_asset_1: name += "asset1"; break;
        case LabStrategy::unit_asset_2: name += "asset2"; break;
    }

    if (!insider_filtration) {
        if (strategy == LabStrategy::insider)
            throw std::invalid_argument("deflated_wealth_check: the insider strategy is not F-predictable");
        const std::size_t P = space.n_paths();
        PathProcess<T> zv(n + 1, std::vector<T>(P, T(1)));
        std::vector<T> z(P, T(1)), v(P, T(1));
        for (int t = 1; t <= n; ++t) {
            std::vector<T> r1, r2;
            if (strategy == LabStrategy::random) {
                r1 = random_per_group<T>(space.f_group(t - 1), space.f_groups(t - 1), rng);
                r2 = random_per_group<T>(space.f_group(t - 1), space.f_groups(t - 1), rng);
            }
            for (std::size_t i = 0; i < P; ++i) {
                V2<T> pi{T(0), T(0)};
                switch (strategy) {
                    case LabStrategy::ordinary: pi = mk.alpha[t][i]; break;
                    case LabStrategy::random: pi = {r1[i], r2[i]}; break;
                    case LabStrategy::unit_asset_1: pi = {T(1), T(0)}; break;
                    case LabStrategy::unit_asset_2: pi = {T(0), T(1)}; break;
                    default: break;
                }
                z[i] *= T(T(1) - dot2(mk.alpha[t][i], mk.dM[t][i]));
                v[i] *= T(T(1) + dot2(pi, returns(mk, t, i)));
                zv[t][i] = z[i] * v[i];
            }
        }
        return make_result<T>(name, martingale_residual(space, zv));
    }

    const std::size_t A = space.n_atoms();
    AtomProcess<T> zv(n + 1, std::vector<T>(A, T(1)));
    std::vector<T> z(A, T(1)), v(A, T(1));
    std::vector<T> prod(space.n_paths());
    std::array<std::vector<T>, 3> sq;
    for (auto& s : sq) s.resize(A);
    for (int t = 1; t <= n; ++t) {
        // drift of dM_t given G_{t-1} from the density: 1{tau<=t-1} E[dM dp(x) | F_{t-1}] / p_{t-1}(x)
        std::vector<V2<T>> drift(A, V2<T>{T(0), T(0)});
        for (int k = 0; k < 2; ++k)
            for (int x = 0; x < E; ++x) {
                for (std::size_t i = 0; i < space.n_paths(); ++i)
                    prod[i] = mk.dM[t][i][k] * (space.density(t, i, x) - space.density(t - 1, i, x));
                const auto cond = space.f_cond(prod, t - 1);
                for (std::size_t i = 0; i < space.n_paths(); ++i)
                    if (space.tau(i) <= t - 1) drift[i * E + x][k] = cond[i] / space.density(t - 1, i, x);
            }
        for (std::size_t a = 0; a < A; ++a) {
            const auto& dm = mk.dM[t][space.atom_path(a)];
            sq[0][a] = dm[0] * dm[0];
            sq[1][a] = dm[0] * dm[1];
            sq[2][a] = dm[1] * dm[1];
        }
        std::array<std::vector<T>, 3> second;
        for (int k = 0; k < 3; ++k) second[k] = space.g_cond(sq[k], t - 1, space.atom_probs());

        std::vector<T> rand1, rand2;
        if (strategy == LabStrategy::random) {
            rand1.resize(A);
            rand2.resize(A);
            const auto& fg = space.f_group(t - 1);
            std::vector<T> pre1(space.f_groups(t - 1)), pre2(space.f_groups(t - 1));
            std::vector<T> post1(space.f_groups(t - 1) * E), post2(space.f_groups(t - 1) * E);
            for (auto& x : pre1) x = T(small_int(rng));
            for (auto& x : pre2) x = T(small_int(rng));
            for (auto& x : post1) x = T(small_int(rng));
            for (auto& x : post2) x = T(small_int(rng));
            for (std::size_t a = 0; a < A; ++a) {
                const std::size_t i = space.atom_path(a);
                const bool post = space.tau(i) <= t - 1;
                const int g = fg[i];
                rand1[a] = post ? post1[g * E + space.atom_mark(a)] : pre1[g];
                rand2[a] = post ? post2[g * E + space.atom_mark(a)] : pre2[g];
            }
        }

        for (std::size_t a = 0; a < A; ++a) {
            const std::size_t i = space.atom_path(a);
            const auto& c = drift[a];
            const std::array<T, 3> cov{T(second[0][a] - c[0] * c[0]), T(second[1][a] - c[0] * c[1]),
                                       T(second[2][a] - c[1] * c[1])};
            const auto& b = mk.bracket[t][i];
            const auto& al = mk.alpha[t][i];
            const V2<T> rhs{T(b[0] * al[0] + b[1] * al[1] + c[0]), T(b[1] * al[0] + b[2] * al[1] + c[1])};
            const V2<T> theta = solve_cov(cov, rhs, al);
            V2<T> pi{T(0), T(0)};
            switch (strategy) {
                case LabStrategy::ordinary: pi = al; break;
                case LabStrategy::insider: pi = theta; break;
                case LabStrategy::random: pi = {rand1[a], rand2[a]}; break;
                case LabStrategy::unit_asset_1: pi = {T(1), T(0)}; break;
                case LabStrategy::unit_asset_2: pi = {T(0), T(1)}; break;
                default: break;
            }
            const V2<T> compensated{T(mk.dM[t][i][0] - c[0]), T(mk.dM[t][i][1] - c[1])};
            z[a] *= T(T(1) - dot2(theta, compensated));
            v[a] *= T(T(1) + dot2(pi, returns(mk, t, i)));
            zv[t][a] = z[a] * v[a];
        }
    }
    return make_result<T>(name, g_martingale_residual(space, zv, space.atom_probs()));
}

template <class T>
PredictableFormReport predictable_form_check(const LatticeSpace<T>& space, const AtomProcess<T>& z) {
    const int n = space.n();
    const int E = space.marks();
    PredictableFormReport out;
    out.measurable = true;
    out.mark_independent = true;
    MaxAbs<T> residual;
    for (int t = 1; t <= n; ++t) {
        if (!space.g_measurable(z[t], t - 1)) out.measurable = false;
        const auto& fg = space.f_group(t - 1);
        const int groups = space.f_groups(t - 1);
        std::vector<T> y(groups, T(0)), yx(static_cast<std::size_t>(groups) * E, T(0));
        std::vector<char> seen_y(groups, 0), seen_yx(static_cast<std::size_t>(groups) * E, 0);
        for (std::size_t a = 0; a < space.n_atoms(); ++a) {
            const std::size_t i = space.atom_path(a);
            const int g = fg[i];
            if (space.tau(i) >= t) {
                if (!seen_y[g]) y[g] = z[t][a], seen_y[g] = 1;
            } else {
                const std::size_t k = static_cast<std::size_t>(g) * E + space.atom_mark(a);
                if (!seen_yx[k]) yx[k] = z[t][a], seen_yx[k] = 1;
            }
        }
        for (int g = 0; g < groups; ++g)
            for (int x = 1; x < E; ++x)
                if (seen_yx[g * E] && yx[g * E + x] != yx[g * E]) out.mark_independent = false;
        for (std::size_t a = 0; a < space.n_atoms(); ++a) {
            const std::size_t i = space.atom_path(a);
            const int g = fg[i];
            const T rebuilt = space.tau(i) >= t ? y[g] : yx[static_cast<std::size_t>(g) * E + space.atom_mark(a)];
            residual.add(T(rebuilt - z[t][a]));
        }
    }
    out.roundtrip_residual = to_double<T>(residual.value);
    out.roundtrip_exact = residual.value == T(0);
    return out;
}

template <class T>
AtomProcess<T> sample_predictable(const LatticeSpace<T>& space, PredictableSample kind, std::mt19937_64& rng) {
    const int n = space.n();
    const int E = space.marks();
    AtomProcess<T> z(n + 1, std::vector<T>(space.n_atoms(), T(0)));
    for (int t = 1; t <= n; ++t) {
        const auto& fg = space.f_group(t - 1);
        const int groups = space.f_groups(t - 1);
        std::vector<T> y(groups), yx(static_cast<std::size_t>(groups) * E);
        for (auto& v : y) v = T(small_int(rng));
        for (auto& v : yx) v = T(small_int(rng));
        for (std::size_t a = 0; a < space.n_atoms(); ++a) {
            const std::size_t i = space.atom_path(a);
            const int g = fg[i];
            const int x = space.atom_mark(a);
            switch (kind) {
                case PredictableSample::f_predictable: z[t][a] = y[g]; break;
                case PredictableSample::post_default_mark:
                    z[t][a] = space.tau(i) >= t ? y[g] : yx[static_cast<std::size_t>(g) * E + x];
                    break;
                case PredictableSample::pre_default_mark: z[t][a] = y[g] + T(x); break;
            }
        }
    }
    return z;
}

#define MARKEDTIME_LAB_INSTANTIATE(T)                                                                          \
    template CheckResult make_result<T>(std::string, const T&, std::string);                                   \
    template PathProcess<T> walk_martingale<T>(const LatticeSpace<T>&);                                        \
    template PathProcess<T> compensated_jumps<T>(const LatticeSpace<T>&);                                      \
    template PathProcess<T> random_martingale<T>(const LatticeSpace<T>&, std::mt19937_64&);                     \
    template PathProcess<T> random_predictable<T>(const LatticeSpace<T>&, std::mt19937_64&);                    \
    template PathProcess<T> stopped<T>(const LatticeSpace<T>&, const PathProcess<T>&);                          \
    template T martingale_residual<T>(const LatticeSpace<T>&, const PathProcess<T>&);                           \
    template CheckResult check_density<T>(const LatticeSpace<T>&);                                             \
    template std::vector<T> insider_measure<T>(const LatticeSpace<T>&);                                        \
    template CheckResult check_insider_measure<T>(const LatticeSpace<T>&);                                     \
    template CheckResult check_q_preserves_martingales<T>(const LatticeSpace<T>&,                              \
                                                          const std::vector<PathProcess<T>>&);                 \
    template Compensator<T> compensator<T>(const LatticeSpace<T>&);                                            \
    template CheckResult check_compensator<T>(const LatticeSpace<T>&);                                         \
    template PathProcess<T> discrete_bracket<T>(const LatticeSpace<T>&, const PathProcess<T>&,                 \
                                                const PathProcess<T>&);                                        \
    template CheckResult check_bracket<T>(const LatticeSpace<T>&, const PathProcess<T>&, const PathProcess<T>&); \
    template DecompositionReport<T> decomposition_check<T>(const LatticeSpace<T>&, const PathProcess<T>&);     \
    template CriterionReport martingale_criterion_check<T>(const LatticeSpace<T>&, const CriterionInput<T>&,   \
                                                           bool);                                              \
    template CriterionInput<T> admissible_criterion_input<T>(const LatticeSpace<T>&, std::mt19937_64&, bool);  \
    template CriterionInput<T> random_criterion_input<T>(const LatticeSpace<T>&, std::mt19937_64&);             \
    template CheckResult deflated_wealth_check<T>(const LatticeSpace<T>&, LabStrategy, bool, std::uint64_t);   \
    template PredictableFormReport predictable_form_check<T>(const LatticeSpace<T>&, const AtomProcess<T>&);   \
    template AtomProcess<T> sample_predictable<T>(const LatticeSpace<T>&, PredictableSample, std::mt19937_64&);

MARKEDTIME_LAB_INSTANTIATE(Rational)
MARKEDTIME_LAB_INSTANTIATE(double)

}  // namespace markedtime::lab
