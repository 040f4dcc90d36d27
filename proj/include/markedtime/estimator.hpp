#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "markedtime/market.hpp"
#include "markedtime/portfolio.hpp"

namespace markedtime {

struct ExperimentConfig {
    MarketSpec spec;
    int n_paths = 10000;
    int n_steps = 1000;  // steps of the simulation grid on [0, T']
    std::uint64_t master_seed = 1;
    bool bridge_correction = true;
    bool crn = true;
    /// Worker threads; 0 means one per hardware thread. Results never depend on it.
    int workers = 0;

    std::vector<std::string> problems() const;
    void validate() const;
};

struct EstimateCI {
    double mean = 0.0;
    double se = 0.0;
    std::int64_t n = 0;
    std::uint64_t seed = 0;
};

struct LabeledValue {
    std::string label;
    double value = 0.0;
};

/// Sum with a fixed binary tree over the index range, so the result depends
/// only on the values and their order.
double pairwise_sum(std::span<const double> values);

/// Mean and standard error of `samples`. The mean is taken relative to the
/// first sample, so n copies of c give exactly c with se 0.
EstimateCI summarize(std::span<const double> samples, std::uint64_t seed);

int resolve_workers(int requested);

/// Runs body(i) for i in [0, n) on `workers` threads. body must only write
/// to per-index slots.
void parallel_for(std::int64_t n, int workers, const std::function<void(std::int64_t)>& body);

/// ln((T' - tau ^ T) / (T' - T)).
double gain_log_term(const MarketSpec& spec, double tau);

/// Per-path ln V_T of `strategy` on the bundles of `config` with seed `seed`.
/// Every path is simulated; when any path violates admissibility an
/// AdmissibilityViolation naming the first such path and the total count is
/// thrown afterwards.
std::vector<double> simulate_log_utilities(const DecomposedStrategy& strategy, const ExperimentConfig& config,
                                           std::uint64_t seed);

EstimateCI estimate_expected_log_utility(const DecomposedStrategy& strategy, const ExperimentConfig& config);

/// Candidate values of the ordinary agent's optimal expected log utility:
/// "theorem" = ln x0 + e^{-2}/(2 (e^{-1}-1)^2) lambda T and
/// "printed" = ln x0 + e^{-1}/(e^{-1}-1)^2 lambda T / 4.
std::vector<LabeledValue> closed_form_VF(const MarketSpec& spec);

/// ln x0 + lambda T (a + ln(1 + a (e^{-1}-1))) with a = alpha^2: the exact
/// expected log utility of continuously rebalancing at alpha in the jump
/// market. Reported next to the candidates as a diagnostic.
double jump_exact_VF(const MarketSpec& spec);

struct GainCandidates {
    double candidate_sigma = 0.0;  // (1/sigma + 1) E[ln((T' - tau^T)/(T' - T))]
    double candidate_unit = 0.0;   // 2 E[...]
    EstimateCI e_log_term;
};

/// Monte Carlo over tau only (same bundles as the wealth simulations).
GainCandidates closed_form_gain(const MarketSpec& spec, const ExperimentConfig& config);

struct ComparisonReport {
    EstimateCI v_ordinary;
    EstimateCI v_insider;
    EstimateCI gain;
    EstimateCI e_log_term;
    /// Labels "vf:theorem", "vf:printed", "gain:sigma_inv_plus_one", "gain:two".
    std::vector<LabeledValue> closed_form_candidates;
    /// z of the gain against each gain candidate ("gain:...") and of
    /// v_ordinary against each VF candidate ("vf:...").
    std::vector<LabeledValue> z_scores;
    /// Per gain candidate: se of gain - c * E[log term], paired under CRN.
    std::vector<LabeledValue> gain_residual_se;
    bool triage_degenerate = false;  // sigma == 1: the two gain prefactors coincide
};

double prefactor_sigma(const MarketSpec& spec);

/// Paired (CRN) or independent comparison of the insider and ordinary optima.
ComparisonReport additional_utility(const ExperimentConfig& config);

const LabeledValue& find_label(const std::vector<LabeledValue>& values, const std::string& label);

}  // namespace markedtime
