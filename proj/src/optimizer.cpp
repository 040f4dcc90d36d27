#include "markedtime/optimizer.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "markedtime/hybrid_model.hpp"

namespace markedtime {

namespace {

constexpr std::int64_t kBlock = 256;

double axis_value(double lo, double hi, int steps, int i) {
    return steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
}

EstimateCI from_moments(double sum, double sumsq, std::int64_t n, double shift, std::uint64_t seed) {
    EstimateCI out;
    out.n = n;
    out.seed = seed;
    const double mean = sum / n;
    out.mean = shift + mean;
    if (n > 1) {
        const double var = std::max(0.0, (sumsq - sum * mean) / (n - 1));
        out.se = std::sqrt(var / n);
    }
    return out;
}

}  // namespace

GridResult grid_optimize_constant(const ExperimentConfig& config, const AllocationBox& box, int steps) {
    config.validate();
    if (steps < 1) throw std::invalid_argument("grid_optimize_constant: steps must be >= 1");
    if (!(box.lo1 <= box.hi1 && box.lo2 <= box.hi2)) throw std::invalid_argument("grid_optimize_constant: empty box");
    const Vec2 alpha = market_alpha(config.spec);
    if (alpha[0] < box.lo1 || alpha[0] > box.hi1 || alpha[1] < box.lo2 || alpha[1] > box.hi2)
        throw std::invalid_argument("grid_optimize_constant: box must contain alpha");

    const std::size_t n_cells = static_cast<std::size_t>(steps) * steps;
    std::vector<Vec2> pis(n_cells);
    for (int a = 0; a < steps; ++a)
        for (int b = 0; b < steps; ++b)
            pis[a * steps + b] = {axis_value(box.lo1, box.hi1, steps, a), axis_value(box.lo2, box.hi2, steps, b)};

    const std::int64_t n = config.n_paths;
    const std::int64_t n_blocks = (n + kBlock - 1) / kBlock;
    std::vector<double> sums(n_blocks * n_cells, 0.0), sumsqs(n_blocks * n_cells, 0.0);
    std::vector<std::uint8_t> bad(n_blocks * n_cells, 0);

    parallel_for(n_blocks, config.workers, [&](std::int64_t blk) {
        double* sum = &sums[blk * n_cells];
        double* sumsq = &sumsqs[blk * n_cells];
        std::uint8_t* flag = &bad[blk * n_cells];
        std::vector<double> a, b;
        for (std::int64_t i = blk * kBlock; i < std::min(n, (blk + 1) * kBlock); ++i) {
            const PathBundle bundle = simulate_bundle(config.spec, config.n_steps, config.master_seed,
                                                      static_cast<std::uint64_t>(i), config.bridge_correction);
            const auto inc = asset_relative_increments(config.spec, bundle);
            a.resize(inc.size());
            b.resize(inc.size());
            for (std::size_t s = 0; s < inc.size(); ++s) {
                a[s] = inc[s][0];
                b[s] = inc[s][1];
            }
            for (std::size_t c = 0; c < n_cells; ++c) {
                if (flag[c]) continue;
                const double p1 = pis[c][0], p2 = pis[c][1];
                double acc = 0.0;
                bool ok = true;
                for (std::size_t s = 0; s < a.size(); ++s) {
                    const double x = p1 * a[s] + p2 * b[s];
                    if (!(x > -1.0)) {
                        ok = false;
                        break;
                    }
                    acc += std::log1p(x);
                }
                if (!ok) {
                    flag[c] = 1;
                    continue;
                }
                sum[c] += acc;
                sumsq[c] += acc * acc;
            }
        }
    });

    GridResult out;
    out.steps = steps;
    out.cell_width = {steps > 1 ? (box.hi1 - box.lo1) / (steps - 1) : 0.0,
                      steps > 1 ? (box.hi2 - box.lo2) / (steps - 1) : 0.0};
    out.cells.resize(n_cells);
    const double shift = std::log(config.spec.x0);
    std::vector<double> col_sum(n_blocks), col_sq(n_blocks);
    bool have_best = false;
    for (std::size_t c = 0; c < n_cells; ++c) {
        bool admissible = true;
        for (std::int64_t k = 0; k < n_blocks; ++k) {
            col_sum[k] = sums[k * n_cells + c];
            col_sq[k] = sumsqs[k * n_cells + c];
            if (bad[k * n_cells + c]) admissible = false;
        }
        GridCell& cell = out.cells[c];
        cell.pi = pis[c];
        cell.admissible = admissible;
        if (admissible) {
            cell.utility = from_moments(pairwise_sum(col_sum), pairwise_sum(col_sq), n, shift, config.master_seed);
        } else {
            cell.utility = {std::nan(""), std::nan(""), n, config.master_seed};
            continue;
        }
        if (!have_best) {
            out.argmax = c;
            have_best = true;
            continue;
        }
        const GridCell& best = out.cells[out.argmax];
        const double norm_c = dot(cell.pi, cell.pi), norm_b = dot(best.pi, best.pi);
        if (cell.utility.mean > best.utility.mean || (cell.utility.mean == best.utility.mean && norm_c < norm_b))
            out.argmax = c;
    }
    if (!have_best) throw std::runtime_error("grid_optimize_constant: no admissible cell");
    return out;
}

bool StationarityReport::all_pass() const {
    for (const auto& p : perturbations)
        if (!p.pass) return false;
    for (const auto& c : curvatures)
        if (!c.pass) return false;
    return true;
}

StationarityReport stationarity_check(const ExperimentConfig& config, double epsilon) {
    config.validate();
    if (!(epsilon >= 0.0)) throw std::invalid_argument("stationarity_check: epsilon must be >= 0");
    const MarketSpec& spec = config.spec;
    const auto insider = insider_strategy(spec);

    // variant 0 is pi_ins; variants 1..8 are (regime, axis, sign) in that nesting order
    struct Variant {
        bool post;
        int axis;
        int sign;
    };
    std::array<Variant, 8> variants{};
    {
        int v = 0;
        for (bool post : {false, true})
            for (int axis = 0; axis < 2; ++axis)
                for (int sign : {1, -1}) variants[v++] = {post, axis, sign};
    }

    const std::int64_t n = config.n_paths;
    std::vector<std::array<double, 9>> values(n);
    std::vector<std::int64_t> bad_step(n, -1);
    std::vector<int> bad_variant(n, -1);
    std::vector<double> bad_inner(n, 0.0);

    parallel_for(n, config.workers, [&](std::int64_t i) {
        const PathBundle bundle = simulate_scenario(spec, config.n_steps, config.master_seed,
                                                    static_cast<std::uint64_t>(i), config.bridge_correction);
        const auto inc = asset_relative_increments(spec, bundle);
        const auto& path = bundle.trading;
        std::array<double, 9> acc{};
        acc.fill(std::log(spec.x0));
        for (std::size_t s = 0; s < inc.size(); ++s) {
            const DriverState state{path.t[s], path.b[s], path.n[s], path.n[s]};
            const bool post = state.t >= bundle.tau;
            const Vec2 base = insider.allocation(state, bundle.tau, bundle.mark);
            for (int v = 0; v < 9; ++v) {
                Vec2 pi = base;
                if (v > 0 && variants[v - 1].post == post) pi[variants[v - 1].axis] += variants[v - 1].sign * epsilon;
                const double x = dot(pi, inc[s]);
                if (!(x > -1.0)) {
                    if (bad_step[i] < 0) {
                        bad_step[i] = static_cast<std::int64_t>(s);
                        bad_variant[i] = v;
                        bad_inner[i] = x;
                    }
                    continue;
                }
                acc[v] += std::log1p(x);
            }
        }
        values[i] = acc;
    });

    std::uint64_t count = 0;
    std::int64_t first = -1;
    for (std::int64_t i = 0; i < n; ++i)
        if (bad_step[i] >= 0) {
            if (first < 0) first = i;
            ++count;
        }
    if (count > 0) {
        AdmissibilityReport report{false, static_cast<std::size_t>(bad_step[first]), bad_inner[first]};
        std::ostringstream msg;
        msg << "stationarity_check: admissibility violated on " << count << " of " << n << " paths (seed "
            << config.master_seed << "); first: path " << first << ", step " << bad_step[first] << ", variant "
            << bad_variant[first] << ", pi.inc = " << bad_inner[first];
        throw AdmissibilityViolation(msg.str(), report, config.master_seed, static_cast<std::uint64_t>(first), count);
    }

    StationarityReport out;
    out.epsilon = epsilon;
    std::vector<double> column(n);
    for (std::int64_t i = 0; i < n; ++i) column[i] = values[i][0];
    out.base = summarize(column, config.master_seed);
    for (int v = 0; v < 8; ++v) {
        for (std::int64_t i = 0; i < n; ++i) column[i] = values[i][v + 1] - values[i][0];
        Perturbation p;
        p.regime = variants[v].post ? "post" : "pre";
        p.axis = variants[v].axis;
        p.sign = variants[v].sign;
        p.difference = summarize(column, config.master_seed);
        p.pass = p.difference.mean <= 3.0 * p.difference.se;
        out.perturbations.push_back(p);
    }
    for (int v = 0; v < 8; v += 2) {
        for (std::int64_t i = 0; i < n; ++i)
            column[i] = (values[i][v + 1] - values[i][0]) + (values[i][v + 2] - values[i][0]);
        Curvature c;
        c.regime = variants[v].post ? "post" : "pre";
        c.axis = variants[v].axis;
        c.second_difference = summarize(column, config.master_seed);
        c.pass = c.second_difference.mean < 0.0;
        out.curvatures.push_back(c);
    }
    return out;
}

}  // namespace markedtime
