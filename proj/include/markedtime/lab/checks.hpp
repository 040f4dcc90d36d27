#pragma once

#include <random>
#include <string>
#include <vector>

#include "markedtime/lab/lattice.hpp"

namespace markedtime::lab {

struct CheckResult {
    std::string name;
    /// Largest absolute deviation found (as a double for reporting).
    double residual = 0.0;
    /// Residual exactly zero (always false for a nonzero double residual).
    bool exact_zero = true;
    bool pass = true;
    std::string detail;
};

/// Pass rule: exact zero for rationals, <= kDoubleTolerance for doubles.
template <class T>
CheckResult make_result(std::string name, const T& residual, std::string detail = {});

// ---- processes on the lattice ----

/// W_t = scale * (sum of the first t steps).
template <class T>
PathProcess<T> walk_martingale(const LatticeSpace<T>& space);
/// J_t - sum_{s<=t} P(jump at s | F_{s-1}).
template <class T>
PathProcess<T> compensated_jumps(const LatticeSpace<T>& space);
/// E[X | F_t] for a random integer-valued terminal X.
template <class T>
PathProcess<T> random_martingale(const LatticeSpace<T>& space, std::mt19937_64& rng);
/// Random integer values, constant on F_{t-1} classes (index t = 1..n; entry 0 is zero).
template <class T>
PathProcess<T> random_predictable(const LatticeSpace<T>& space, std::mt19937_64& rng);
/// X stopped at tau.
template <class T>
PathProcess<T> stopped(const LatticeSpace<T>& space, const PathProcess<T>& x);

template <class T>
T martingale_residual(const LatticeSpace<T>& space, const PathProcess<T>& x);

// ---- density hypothesis ----

/// E[p_{t+1}(x) | F_t] = p_t(x), sum_x p_t(x) eta(x) = 1, p_0 = 1, p > 0.
template <class T>
CheckResult check_density(const LatticeSpace<T>& space);

// ---- insider measure ----

/// Q(path, x) = P(path, x) / p_n(path, x) (zero on atoms with P = 0).
template <class T>
std::vector<T> insider_measure(const LatticeSpace<T>& space);

/// Mass 1, Q = P on paths, mark law eta, mark independent of the path, and
/// E_P[dQ/dP | G_t] = 1{tau>t} + 1{tau<=t} / p_t(G).
template <class T>
CheckResult check_insider_measure(const LatticeSpace<T>& space);

/// Under Q, every listed F-martingale stays a martingale in G.
template <class T>
CheckResult check_q_preserves_martingales(const LatticeSpace<T>& space, const std::vector<PathProcess<T>>& martingales);

// ---- compensator ----

template <class T>
struct Compensator {
    PathProcess<T> D, Lambda, N;
};

template <class T>
Compensator<T> compensator(const LatticeSpace<T>& space);

/// N = D - Lambda is an F-martingale, Lambda is predictable, and Lambda = D
/// when tau is deterministic.
template <class T>
CheckResult check_compensator(const LatticeSpace<T>& space);

// ---- brackets ----

/// <A,B>_t = sum_{s<=t} E[dA_s dB_s | F_{s-1}].
template <class T>
PathProcess<T> discrete_bracket(const LatticeSpace<T>& space, const PathProcess<T>& a, const PathProcess<T>& b);

/// <A,B> is predictable, starts at 0, and AB - <A,B> is a martingale.
template <class T>
CheckResult check_bracket(const LatticeSpace<T>& space, const PathProcess<T>& a, const PathProcess<T>& b);

// ---- decomposition ----

template <class T>
struct DecompositionReport {
    CheckResult result;
    /// C_t(path, x) = sum_{s<=t} 1{tau<=s-1} E[dM_s dp_s(x) | F_{s-1}] / p_{s-1}(x), atom-indexed.
    AtomProcess<T> correction;
    /// max |C_t| over t <= tau.
    double correction_before_tau = 0.0;
    double max_abs_correction = 0.0;
};

/// M~ = M - 1{tau<=t} C_t(G) is a G-martingale under P.
template <class T>
DecompositionReport<T> decomposition_check(const LatticeSpace<T>& space, const PathProcess<T>& m);

// ---- martingale criterion ----

template <class T>
struct CriterionInput {
    PathProcess<T> y;                // F-adapted, used on {tau > t}
    std::vector<PathProcess<T>> yx;  // per mark, F-adapted
};

struct CriterionReport {
    bool conditions_hold = false;
    bool conclusion_holds = false;
    double condition_residual = 0.0;
    double conclusion_residual = 0.0;
    /// Implication "conditions => conclusion" respected.
    bool consistent() const { return !conditions_hold || conclusion_holds; }
};

/// Proposition form (corollary = false): (1) every Y(x) is an F-martingale,
/// (2) Y~_t = 1{tau>t} Y_t + sum_x eta(x) [sum_{u<=t} Y_{u-1}(x) dLambda_u
/// + <N, Y(x)>_t] is an F-martingale; conclusion: Z is a (G, Q)-martingale.
/// Corollary form: Y(x) p(x) replaces Y(x) in both conditions and the
/// conclusion is under P.
template <class T>
CriterionReport martingale_criterion_check(const LatticeSpace<T>& space, const CriterionInput<T>& input,
                                           bool corollary);

/// Random (Y, Y(.)) satisfying the conditions by construction: random
/// martingales for Y(x) (or Y(x) p(x)), and Y recovered from the martingale
/// closure of Y~.
template <class T>
CriterionInput<T> admissible_criterion_input(const LatticeSpace<T>& space, std::mt19937_64& rng, bool corollary);

/// Random (Y, Y(.)) with no structure.
template <class T>
CriterionInput<T> random_criterion_input(const LatticeSpace<T>& space, std::mt19937_64& rng);

// ---- deflated wealth ----

enum class LabStrategy { zero, ordinary, insider, random, unit_asset_1, unit_asset_2 };

/// Lattice market: M = (scale * walk, compensated jumps), relative returns
/// R = dM + d<M> alpha with alpha an F-predictable random vector drawn from
/// `alpha_seed`. The ordinary deflator is Z_{t+1} = Z_t (1 - alpha' dM); the
/// insider's uses theta = Cov(dM | G_t)^{-1} (d<M> alpha + E[dM | G_t]) and
/// the G-compensated dM. Checks Z V is a martingale in the agent's filtration.
template <class T>
CheckResult deflated_wealth_check(const LatticeSpace<T>& space, LabStrategy strategy, bool insider_filtration,
                                  std::uint64_t alpha_seed);

// ---- predictable form ----

struct PredictableFormReport {
    bool measurable = false;
    double roundtrip_residual = 0.0;
    bool roundtrip_exact = false;
    /// Extracted Y(x) is the same for every x (on the post-default part).
    bool mark_independent = false;
};

/// Z is atom-indexed for t = 1..n (entry 0 ignored) and should be
/// G_{t-1}-measurable. Extracts Y_t (from atoms with tau >= t) and Y_t(x)
/// (tau < t) and rebuilds 1{tau>=t} Y_t + 1{tau<t} Y_t(G).
template <class T>
PredictableFormReport predictable_form_check(const LatticeSpace<T>& space, const AtomProcess<T>& z);

enum class PredictableSample { f_predictable, post_default_mark, pre_default_mark };

template <class T>
AtomProcess<T> sample_predictable(const LatticeSpace<T>& space, PredictableSample kind, std::mt19937_64& rng);

}  // namespace markedtime::lab
