#pragma once

#include <array>
#include <cstdint>

namespace markedtime {

/// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as easy
/// as 1, 2, 3"). A pure function of (counter, key); no internal state.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter apply(Counter ctr, Key key);
};

/// Independent substreams carved out of one (master_seed, path_index) pair.
enum class Substream : std::uint32_t {
    brownian = 0,
    poisson = 1,
    crossing = 2,
    bridge = 3,
    probe = 4,
};

/// Deterministic random stream for one simulated path.
///
/// The stream is keyed on the master seed and addressed by
/// (path_index, substream, block counter), so the draws for a path never
/// depend on which worker produced them or in which order paths were visited.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t path_index,
              Substream substream = Substream::brownian);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t path_index() const { return path_index_; }

    /// Same keys, different substream; the returned stream starts at block 0.
    RngStream substream(Substream s) const;

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1).
    double uniform();
    /// Standard normal (Box-Muller; both variates of a pair are used).
    double normal();
    /// Exponential with the given rate (> 0).
    double exponential(double rate);

    /// Random access: the value the index-th call of uniform() returns on a
    /// fresh stream, independent of the sequential cursor.
    double uniform_at(std::uint64_t index) const;
    /// Random access: the index-th normal() of a fresh stream.
    double normal_at(std::uint64_t index) const;

private:
    Philox4x32::Counter counter_for(std::uint64_t block) const;
    void refill();

    std::uint64_t master_seed_;
    std::uint64_t path_index_;
    Substream substream_;
    Philox4x32::Key key_;
    std::uint64_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int position_ = 4;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// Maps 64 random bits to a double in (0, 1). 52 bits keep the largest
/// value, 1 - 2^-53, below 1 (53 bits would round up to 1).
inline double bits_to_open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// SplitMix64 finalizer, used to derive auxiliary seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace markedtime
