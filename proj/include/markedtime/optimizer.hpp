#pragma once

#include <string>
#include <vector>

#include "markedtime/estimator.hpp"

namespace markedtime {

struct AllocationBox {
    double lo1 = -2.0, hi1 = 2.0;
    double lo2 = -2.0, hi2 = 2.0;
};

struct GridCell {
    Vec2 pi{};
    EstimateCI utility;
    /// False when 1 + pi . inc <= 0 on some simulated step.
    bool admissible = true;
};

struct GridResult {
    int steps = 0;
    Vec2 cell_width{};
    /// Row-major: pi1 index outer, pi2 index inner.
    std::vector<GridCell> cells;
    std::size_t argmax = 0;

    const GridCell& best() const { return cells.at(argmax); }
};

/// Evaluates every constant allocation of a steps x steps grid over `box` on
/// one shared path set and returns the admissible cell with the largest mean
/// (ties go to the smaller allocation norm, then to the lower index).
GridResult grid_optimize_constant(const ExperimentConfig& config, const AllocationBox& box, int steps);

struct Perturbation {
    std::string regime;  // "pre" or "post"
    int axis = 0;        // 0 or 1
    int sign = 1;        // +1 or -1
    EstimateCI difference;  // paired U(perturbed) - U(pi_ins)
    bool pass = false;      // difference.mean <= 3 se
};

struct Curvature {
    std::string regime;
    int axis = 0;
    /// Paired U(+eps) + U(-eps) - 2 U(0).
    EstimateCI second_difference;
    bool pass = false;  // strictly negative
};

struct StationarityReport {
    double epsilon = 0.0;
    std::vector<Perturbation> perturbations;  // 8 entries
    std::vector<Curvature> curvatures;        // 4 entries
    EstimateCI base;

    bool all_pass() const;
};

/// Perturbs pi_ins by +-eps e_i before and after default separately.
StationarityReport stationarity_check(const ExperimentConfig& config, double epsilon = 0.05);

}  // namespace markedtime
