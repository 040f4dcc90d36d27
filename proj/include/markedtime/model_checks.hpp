#pragma once

#include <cstdint>
#include <vector>

#include "markedtime/estimator.hpp"
#include "markedtime/market.hpp"

namespace markedtime {

struct DensityProbe {
    DriverState state;
    Mark mark;
};

/// Probes used by density-check and the acceptance suite when none are given.
std::vector<DensityProbe> default_density_probes();

/// Sum over k and Gauss-Kronrod integral over x1 of p_t(x) eta(dx) at
/// `state`. Should be 1.
double density_normalization(const MarketSpec& spec, const DriverState& state);

/// Monte Carlo mean of p_t(mark) with (B_t, N_t) drawn exactly from time 0.
/// Should be 1 (p is a unit-mean martingale).
EstimateCI density_unit_mean(const MarketSpec& spec, double t, const Mark& mark, std::int64_t n_samples,
                             std::uint64_t seed, int workers = 0);

struct DriftOracle {
    Vec2 formula{};
    EstimateCI m1;
    EstimateCI m2;
};

/// Regression estimate of the information drift at `state` from one step of
/// length h: the sample means of dp dM^i / (p d<M^i>) with dM^1 = sigma dB
/// and dM^2 = (e^{-1}-1)(dN - lambda h). Requires state.n_left == state.n.
DriftOracle drift_oracle(const MarketSpec& spec, const DriverState& state, const Mark& mark, double h,
                         std::int64_t n_samples, std::uint64_t seed, int workers = 0);

}  // namespace markedtime
