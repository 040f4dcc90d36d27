#include "markedtime/lab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace markedtime::lab {

template <>
double to_double<Rational>(const Rational& v) {
    return v.get_d();
}
template <>
double to_double<double>(const double& v) {
    return v;
}
template <>
Rational abs_value<Rational>(const Rational& v) {
    return abs(v);
}
template <>
double abs_value<double>(const double& v) {
    return std::abs(v);
}

namespace {

template <class T>
bool is_zero(const T& v) {
    if constexpr (std::is_same_v<T, double>)
        return std::abs(v) <= kDoubleTolerance;
    else
        return v == 0;
}

}  // namespace

int TauRule::evaluate(const Path& path, int n_steps) const {
    const int never = n_steps + 1;
    auto first_jump = [&] {
        for (int t = 1; t <= n_steps; ++t)
            if ((path.jumps >> (t - 1)) & 1u) return t;
        return never;
    };
    auto walk_hit = [&] {
        int sum = 0;
        for (int t = 1; t <= n_steps; ++t) {
            sum += (path.walk >> (t - 1)) & 1u ? 1 : -1;
            if (sum <= -level) return t;
        }
        return never;
    };
    switch (kind) {
        case TauKind::deterministic: return time >= 1 && time <= n_steps ? time : never;
        case TauKind::first_jump: return first_jump();
        case TauKind::walk_hit: return walk_hit();
        case TauKind::hybrid: return std::min(first_jump(), walk_hit());
        case TauKind::never: return never;
    }
    return never;
}

std::string TauRule::describe() const {
    switch (kind) {
        case TauKind::deterministic: return "deterministic(" + std::to_string(time) + ")";
        case TauKind::first_jump: return "first_jump";
        case TauKind::walk_hit: return "walk_hit(" + std::to_string(level) + ")";
        case TauKind::hybrid: return "hybrid(" + std::to_string(level) + ")";
        case TauKind::never: return "never";
    }
    return "?";
}

template <class T>
std::vector<std::string> LatticeModel<T>::problems() const {
    std::vector<std::string> out;
    if (n_steps < 1 || n_steps > kMaxSteps)
        out.push_back("n_steps must lie in 1.." + std::to_string(kMaxSteps));
    if (n_marks < 1 || n_marks > kMaxMarks)
        out.push_back("n_marks must lie in 1.." + std::to_string(kMaxMarks));
    if (!(jump_probability >= T(0) && jump_probability < T(1))) out.push_back("jump probability must lie in [0, 1)");
    if (!(scale > T(0))) out.push_back("walk scale must be > 0");
    if (!kernel) out.push_back("mark kernel missing");
    return out;
}

template <class T>
LatticeSpace<T>::LatticeSpace(LatticeModel<T> model, bool require_positive_kernel) : model_(std::move(model)) {
    const auto problems = model_.problems();
    if (!problems.empty()) {
        std::string msg = problems.front();
        for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
        throw LatticeError(msg);
    }
    const int n = model_.n_steps;
    const int E = model_.n_marks;
    const T q = model_.jump_probability;
    const T one(1);

    std::vector<std::uint32_t> jump_sets;
    if (q == T(0)) {
        jump_sets = {0};
    } else if (model_.jump_mode == JumpMode::at_most_one) {
        jump_sets.push_back(0);
        for (int s = 0; s < n; ++s) jump_sets.push_back(1u << s);
    } else {
        for (std::uint32_t j = 0; j < (1u << n); ++j) jump_sets.push_back(j);
    }
    const std::size_t total_paths = (std::size_t{1} << n) * jump_sets.size();
    if (total_paths * static_cast<std::size_t>(E) > kMaxAtoms)
        throw LatticeError("state space too large: " + std::to_string(total_paths * E) + " atoms");

    T walk_prob(1);
    for (int s = 0; s < n; ++s) walk_prob /= 2;
    auto jump_prob = [&](std::uint32_t jumps) {
        T p(1);
        if (model_.jump_mode == JumpMode::at_most_one) {
            for (int s = 0; s < n; ++s) {
                if ((jumps >> s) & 1u) return T(p * q);
                p *= one - q;
            }
            return p;
        }
        for (int s = 0; s < n; ++s) p *= ((jumps >> s) & 1u) ? q : T(one - q);
        return p;
    };

    for (std::uint32_t jumps : jump_sets) {
        const T pj = jump_prob(jumps);
        for (std::uint32_t walk = 0; walk < (1u << n); ++walk) {
            paths_.push_back({walk, jumps});
            path_prob_.push_back(walk_prob * pj);
        }
    }

    kernel_.reserve(paths_.size() * E);
    for (std::size_t i = 0; i < paths_.size(); ++i) {
        const auto row = model_.kernel(paths_[i]);
        if (static_cast<int>(row.size()) != E) throw LatticeError("mark kernel row has the wrong length");
        T sum(0);
        for (const auto& k : row) {
            if (k < T(0) || (require_positive_kernel && !(k > T(0))))
                throw LatticeError("mark kernel not strictly positive");
            sum += k;
        }
        if (!is_zero(T(sum - one))) throw LatticeError("mark kernel row does not sum to 1");
        for (const auto& k : row) kernel_.push_back(k);
    }

    tau_.resize(paths_.size());
    for (std::size_t i = 0; i < paths_.size(); ++i) tau_[i] = model_.tau.evaluate(paths_[i], n);

    eta_.assign(E, T(0));
    atom_prob_.resize(paths_.size() * E);
    for (std::size_t i = 0; i < paths_.size(); ++i)
        for (int x = 0; x < E; ++x) {
            atom_prob_[i * E + x] = path_prob_[i] * kernel_[i * E + x];
            eta_[x] += atom_prob_[i * E + x];
        }

    f_group_.resize(n + 1);
    g_group_.resize(n + 1);
    f_count_.resize(n + 1);
    g_count_.resize(n + 1);
    for (int t = 0; t <= n; ++t) {
        const std::uint32_t mask = t == 0 ? 0u : ((1u << t) - 1u);
        std::unordered_map<std::uint64_t, int> ids;
        auto& fg = f_group_[t];
        fg.resize(paths_.size());
        for (std::size_t i = 0; i < paths_.size(); ++i) {
            const std::uint64_t key = (paths_[i].walk & mask) | (std::uint64_t{paths_[i].jumps & mask} << 32);
            auto [it, fresh] = ids.try_emplace(key, static_cast<int>(ids.size()));
            fg[i] = it->second;
        }
        f_count_[t] = static_cast<int>(ids.size());

        std::unordered_map<std::uint64_t, int> gids;
        auto& gg = g_group_[t];
        gg.resize(n_atoms());
        for (std::size_t a = 0; a < n_atoms(); ++a) {
            const std::size_t i = a / E;
            const int revealed = tau_[i] <= t ? static_cast<int>(a % E) + 1 : 0;
            const std::uint64_t key = static_cast<std::uint64_t>(fg[i]) * (E + 1) + revealed;
            auto [it, fresh] = gids.try_emplace(key, static_cast<int>(gids.size()));
            gg[a] = it->second;
        }
        g_count_[t] = static_cast<int>(gids.size());
    }

    density_.resize(n + 1);
    for (int t = 0; t <= n; ++t) {
        const int groups = f_count_[t];
        std::vector<T> class_prob(groups, T(0));
        std::vector<T> joint(static_cast<std::size_t>(groups) * E, T(0));
        for (std::size_t i = 0; i < paths_.size(); ++i) {
            const int g = f_group_[t][i];
            class_prob[g] += path_prob_[i];
            for (int x = 0; x < E; ++x) joint[g * E + x] += atom_prob_[i * E + x];
        }
        auto& d = density_[t];
        d.resize(paths_.size() * E);
        for (std::size_t i = 0; i < paths_.size(); ++i) {
            const int g = f_group_[t][i];
            for (int x = 0; x < E; ++x)
                d[i * E + x] = eta_[x] == T(0) ? T(0) : T(joint[g * E + x] / (class_prob[g] * eta_[x]));
        }
    }
}

template <class T>
std::vector<T> LatticeSpace<T>::f_cond(const std::vector<T>& values, int t) const {
    const auto& group = f_group_[t];
    std::vector<T> num(f_count_[t], T(0)), den(f_count_[t], T(0));
    for (std::size_t i = 0; i < paths_.size(); ++i) {
        num[group[i]] += path_prob_[i] * values[i];
        den[group[i]] += path_prob_[i];
    }
    for (int g = 0; g < f_count_[t]; ++g) num[g] /= den[g];
    std::vector<T> out(paths_.size());
    for (std::size_t i = 0; i < paths_.size(); ++i) out[i] = num[group[i]];
    return out;
}

template <class T>
std::vector<T> LatticeSpace<T>::g_cond(const std::vector<T>& values, int t, const std::vector<T>& probs) const {
    const auto& group = g_group_[t];
    std::vector<T> num(g_count_[t], T(0)), den(g_count_[t], T(0));
    for (std::size_t a = 0; a < n_atoms(); ++a) {
        num[group[a]] += probs[a] * values[a];
        den[group[a]] += probs[a];
    }
    for (int g = 0; g < g_count_[t]; ++g)
        if (den[g] != T(0)) num[g] /= den[g];
    std::vector<T> out(n_atoms());
    for (std::size_t a = 0; a < n_atoms(); ++a) out[a] = num[group[a]];
    return out;
}

template <class T>
bool LatticeSpace<T>::f_measurable(const std::vector<T>& values, int t) const {
    std::vector<int> seen(f_count_[t], -1);
    for (std::size_t i = 0; i < paths_.size(); ++i) {
        const int g = f_group_[t][i];
        if (seen[g] < 0)
            seen[g] = static_cast<int>(i);
        else if (!is_zero(T(values[i] - values[seen[g]])))
            return false;
    }
    return true;
}

template <class T>
bool LatticeSpace<T>::g_measurable(const std::vector<T>& values, int t) const {
    std::vector<long> seen(g_count_[t], -1);
    for (std::size_t a = 0; a < n_atoms(); ++a) {
        const int g = g_group_[t][a];
        if (seen[g] < 0)
            seen[g] = static_cast<long>(a);
        else if (!is_zero(T(values[a] - values[seen[g]])))
            return false;
    }
    return true;
}

template struct LatticeModel<Rational>;
template struct LatticeModel<double>;
template class LatticeSpace<Rational>;
template class LatticeSpace<double>;

}  // namespace markedtime::lab
