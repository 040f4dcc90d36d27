#include "markedtime/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "markedtime/hybrid_model.hpp"

namespace markedtime {

std::vector<std::string> ExperimentConfig::problems() const {
    std::vector<std::string> out = spec.problems();
    if (n_paths < 1) out.push_back("n_paths must be >= 1");
    if (n_steps < 1) out.push_back("n_steps must be >= 1");
    if (workers < 0) out.push_back("workers must be >= 0");
    return out;
}

void ExperimentConfig::validate() const {
    auto p = problems();
    if (!p.empty()) throw ValidationError(std::move(p));
}

double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t leaf = 32;
    if (values.size() <= leaf) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

EstimateCI summarize(std::span<const double> samples, std::uint64_t seed) {
    EstimateCI out;
    out.n = static_cast<std::int64_t>(samples.size());
    out.seed = seed;
    if (samples.empty()) return out;
    const double shift = samples[0];
    std::vector<double> work(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) work[i] = samples[i] - shift;
    const double offset = pairwise_sum(work) / static_cast<double>(samples.size());
    out.mean = shift + offset;
    if (samples.size() > 1) {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double d = (samples[i] - shift) - offset;
            work[i] = d * d;
        }
        const double var = pairwise_sum(work) / static_cast<double>(samples.size() - 1);
        out.se = std::sqrt(var / static_cast<double>(samples.size()));
    }
    return out;
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::int64_t n, int workers, const std::function<void(std::int64_t)>& body) {
    if (n <= 0) return;
    workers = std::max(1, std::min<int>(resolve_workers(workers), static_cast<int>(std::min<std::int64_t>(n, 1 << 20))));
    if (workers == 1) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    constexpr std::int64_t chunk = 64;
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::mutex failure_mutex;
    auto run = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::int64_t begin = next.fetch_add(chunk);
            if (begin >= n) return;
            const std::int64_t end = std::min(n, begin + chunk);
            try {
                for (std::int64_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                failed = true;
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

double gain_log_term(const MarketSpec& spec, double tau) {
    return std::log((spec.T_prime - std::min(tau, spec.T)) / (spec.T_prime - spec.T));
}

namespace {

struct PathRun {
    std::vector<std::vector<double>> log_v;  // [strategy][path]
    std::vector<double> log_term;            // per path
};

/// Simulates every path once and evaluates all strategies on it.
PathRun run_paths(const std::vector<const DecomposedStrategy*>& strategies, const ExperimentConfig& config,
                  std::uint64_t seed) {
    config.validate();
    const std::int64_t n = config.n_paths;
    PathRun out;
    out.log_v.assign(strategies.size(), std::vector<double>(n, 0.0));
    out.log_term.assign(n, 0.0);
    std::vector<std::uint8_t> bad(n * strategies.size(), 0);
    std::vector<AdmissibilityReport> reports(n * strategies.size());

    parallel_for(n, config.workers, [&](std::int64_t i) {
        const PathBundle bundle =
            simulate_scenario(config.spec, config.n_steps, seed, static_cast<std::uint64_t>(i), config.bridge_correction);
        out.log_term[i] = gain_log_term(config.spec, bundle.tau);
        const auto inc = asset_relative_increments(config.spec, bundle);
        for (std::size_t s = 0; s < strategies.size(); ++s) {
            double lv = 0.0;
            const auto report = log_terminal_wealth(config.spec.x0, *strategies[s], bundle, inc, lv);
            out.log_v[s][i] = lv;
            if (!report.admissible) {
                bad[i * strategies.size() + s] = 1;
                reports[i * strategies.size() + s] = report;
            }
        }
    });

    for (std::size_t s = 0; s < strategies.size(); ++s) {
        std::uint64_t count = 0;
        std::int64_t first = -1;
        for (std::int64_t i = 0; i < n; ++i) {
            if (bad[i * strategies.size() + s]) {
                if (first < 0) first = i;
                ++count;
            }
        }
        if (count == 0) continue;
        const auto& report = reports[first * strategies.size() + s];
        std::ostringstream msg;
        msg << "admissibility violated by the " << to_string(strategies[s]->kind) << " strategy on " << count
            << " of " << n << " paths (seed " << seed << "); first: path " << first << ", step "
            << *report.first_violation_step << ", pi.inc = " << report.violating_inner_product;
        throw AdmissibilityViolation(msg.str(), report, seed, static_cast<std::uint64_t>(first), count);
    }
    return out;
}

}  // namespace

std::vector<double> simulate_log_utilities(const DecomposedStrategy& strategy, const ExperimentConfig& config,
                                           std::uint64_t seed) {
    return std::move(run_paths({&strategy}, config, seed).log_v[0]);
}

EstimateCI estimate_expected_log_utility(const DecomposedStrategy& strategy, const ExperimentConfig& config) {
    const auto samples = simulate_log_utilities(strategy, config, config.master_seed);
    return summarize(samples, config.master_seed);
}

std::vector<LabeledValue> closed_form_VF(const MarketSpec& spec) {
    const double j2 = kJumpSize * kJumpSize;
    const double lt = spec.lambda * spec.T;
    return {{"theorem", std::log(spec.x0) + 0.5 * std::exp(-2.0) / j2 * lt},
            {"printed", std::log(spec.x0) + std::exp(-1.0) / j2 * lt / 4.0}};
}

double jump_exact_VF(const MarketSpec& spec) {
    const double a = market_alpha(spec)[1];
    return std::log(spec.x0) + spec.lambda * spec.T * (a + std::log1p(a * kJumpSize));
}

double prefactor_sigma(const MarketSpec& spec) { return 1.0 / spec.sigma + 1.0; }

GainCandidates closed_form_gain(const MarketSpec& spec, const ExperimentConfig& config) {
    ExperimentConfig c = config;
    c.spec = spec;
    c.validate();
    std::vector<double> terms(c.n_paths);
    parallel_for(c.n_paths, c.workers, [&](std::int64_t i) {
        const PathBundle bundle =
            simulate_bundle(spec, c.n_steps, c.master_seed, static_cast<std::uint64_t>(i), c.bridge_correction);
        terms[i] = gain_log_term(spec, bundle.tau);
    });
    GainCandidates out;
    out.e_log_term = summarize(terms, c.master_seed);
    out.candidate_sigma = prefactor_sigma(spec) * out.e_log_term.mean;
    out.candidate_unit = 2.0 * out.e_log_term.mean;
    return out;
}

const LabeledValue& find_label(const std::vector<LabeledValue>& values, const std::string& label) {
    for (const auto& v : values)
        if (v.label == label) return v;
    throw std::out_of_range("no value labeled " + label);
}

ComparisonReport additional_utility(const ExperimentConfig& config) {
    config.validate();
    const auto ord = ordinary_strategy(config.spec);
    const auto ins = insider_strategy(config.spec);
    const std::uint64_t seed = config.master_seed;

    ComparisonReport report;
    report.triage_degenerate = config.spec.sigma == 1.0;
    const double prefactors[2] = {prefactor_sigma(config.spec), 2.0};
    const char* gain_labels[2] = {"gain:sigma_inv_plus_one", "gain:two"};

    std::vector<double> ord_v, ins_v, log_term;
    if (config.crn) {
        auto run = run_paths({&ord, &ins}, config, seed);
        ord_v = std::move(run.log_v[0]);
        ins_v = std::move(run.log_v[1]);
        log_term = std::move(run.log_term);
    } else {
        auto run_o = run_paths({&ord}, config, seed);
        auto run_i = run_paths({&ins}, config, mix_seed(seed, 0x1A5u));
        ord_v = std::move(run_o.log_v[0]);
        ins_v = std::move(run_i.log_v[0]);
        log_term = std::move(run_o.log_term);
    }
    report.v_ordinary = summarize(ord_v, seed);
    report.v_insider = summarize(ins_v, config.crn ? seed : mix_seed(seed, 0x1A5u));
    report.e_log_term = summarize(log_term, seed);

    const std::size_t n = ord_v.size();
    std::vector<double> diff(n);
    if (config.crn) {
        for (std::size_t i = 0; i < n; ++i) diff[i] = ins_v[i] - ord_v[i];
        report.gain = summarize(diff, seed);
    } else {
        report.gain.n = static_cast<std::int64_t>(n);
        report.gain.seed = seed;
        report.gain.se = std::hypot(report.v_ordinary.se, report.v_insider.se);
    }
    report.gain.mean = report.v_insider.mean - report.v_ordinary.mean;

    for (const auto& vf : closed_form_VF(config.spec)) {
        report.closed_form_candidates.push_back({"vf:" + vf.label, vf.value});
        const double z = report.v_ordinary.se > 0.0 ? (report.v_ordinary.mean - vf.value) / report.v_ordinary.se : 0.0;
        report.z_scores.push_back({"vf:" + vf.label, z});
    }
    for (int c = 0; c < 2; ++c) {
        const double value = prefactors[c] * report.e_log_term.mean;
        report.closed_form_candidates.push_back({gain_labels[c], value});
        double se;
        if (config.crn) {
            for (std::size_t i = 0; i < n; ++i) diff[i] = (ins_v[i] - ord_v[i]) - prefactors[c] * log_term[i];
            se = summarize(diff, seed).se;
        } else {
            se = std::hypot(report.gain.se, prefactors[c] * report.e_log_term.se);
        }
        report.gain_residual_se.push_back({gain_labels[c], se});
        report.z_scores.push_back({gain_labels[c], se > 0.0 ? (report.gain.mean - value) / se : 0.0});
    }
    return report;
}

}  // namespace markedtime
