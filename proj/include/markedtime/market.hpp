#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace markedtime {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Relative jump size of the second asset at a Poisson jump: e^{-1} - 1.
inline const double kJumpSize = std::exp(-1.0) - 1.0;

/// Allocation (or any per-asset vector) in the two-asset hybrid market.
using Vec2 = std::array<double, 2>;

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

/// Thrown when inputs break a documented precondition. Carries every
/// problem found, not just the first.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Parameters of the hybrid default market.
///
/// S1 = exp(sigma B - sigma^2 t / 2) defaults when it first reaches `barrier`;
/// S2 = exp(lambda t - N) defaults at its first jump. The mark is the pair of
/// asset values at `T_prime`, strictly after the investment horizon `T`.
struct MarketSpec {
    double sigma = 0.5;
    double lambda = 1.0;
    double barrier = 0.5;
    double T = 1.0;
    double T_prime = 2.0;
    double x0 = 1.0;
    /// Minimum gap T' - T; negative means "use 1e-6 * T'".
    double horizon_margin = -1.0;

    double effective_margin() const { return horizon_margin < 0.0 ? 1e-6 * T_prime : horizon_margin; }

    /// Every violated invariant, human readable; empty when valid.
    std::vector<std::string> problems() const;
    /// Throws ValidationError when problems() is non-empty.
    void validate() const;
};

/// The revealed mark G = (S1_{T'}, S2_{T'}).
///
/// The second component is kept as the integer jump count k = N_{T'}, so that
/// ln x2 = lambda T' - k holds exactly and the density indicator never sees a
/// rounded logarithm.
struct Mark {
    double x1 = 1.0;
    int k = 0;

    double log_x2(const MarketSpec& spec) const { return spec.lambda * spec.T_prime - k; }
    double x2(const MarketSpec& spec) const { return std::exp(log_x2(spec)); }
};

/// Values of the driving noises seen by a predictable rule at time t.
struct DriverState {
    double t = 0.0;
    double b = 0.0;  // B_t
    int n_left = 0;  // N_{t-}
    int n = 0;       // N_t
};

/// Diagonal 2x2 bracket matrix.
struct Bracket2 {
    double d1 = 0.0;
    double d2 = 0.0;

    double operator()(int i, int j) const { return i != j ? 0.0 : (i == 0 ? d1 : d2); }
};

/// Uniform time grid on [0, horizon].
class TimeGrid {
public:
    TimeGrid(double horizon, int n_steps);

    double horizon() const { return horizon_; }
    int n_steps() const { return n_steps_; }
    double dt() const { return n_steps_ == 0 ? 0.0 : horizon_ / n_steps_; }
    /// node(0) == 0 and node(n_steps) == horizon exactly (a grid with no
    /// steps has the single node 0).
    double node(int k) const { return k == n_steps_ && k > 0 ? horizon_ : k * dt(); }

private:
    double horizon_;
    int n_steps_;
};

}  // namespace markedtime
