#include "markedtime/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace markedtime {

namespace {

constexpr std::uint32_t kMultiplier0 = 0xD2511F53u;
constexpr std::uint32_t kMultiplier1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
constexpr int kRounds = 10;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(product);
    hi = static_cast<std::uint32_t>(product >> 32);
}

std::pair<double, double> box_muller(double u1, double u2) {
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace

Philox4x32::Counter Philox4x32::apply(Counter ctr, Key key) {
    for (int round = 0; round < kRounds; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kMultiplier0, ctr[0], lo0, hi0);
        mulhilo(kMultiplier1, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t path_index, Substream substream)
    : master_seed_(master_seed),
      path_index_(path_index),
      substream_(substream),
      key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)} {}

RngStream RngStream::substream(Substream s) const {
    return RngStream(master_seed_, path_index_, s);
}

Philox4x32::Counter RngStream::counter_for(std::uint64_t block) const {
    // Block counter gets 48 bits, the substream id the top 16 bits of word 1.
    if (block >> 48) throw std::overflow_error("RngStream: block counter exhausted");
    const auto sub = static_cast<std::uint32_t>(substream_);
    return {static_cast<std::uint32_t>(block),
            static_cast<std::uint32_t>((block >> 32) & 0xFFFFu) | (sub << 16),
            static_cast<std::uint32_t>(path_index_),
            static_cast<std::uint32_t>(path_index_ >> 32)};
}

void RngStream::refill() {
    buffer_ = Philox4x32::apply(counter_for(block_++), key_);
    position_ = 0;
}

std::uint64_t RngStream::next_u64() {
    if (position_ > 2) refill();
    const std::uint64_t hi = buffer_[position_];
    const std::uint64_t lo = buffer_[position_ + 1];
    position_ += 2;
    return (hi << 32) | lo;
}

double RngStream::uniform() { return bits_to_open_unit(next_u64()); }

double RngStream::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const auto [z0, z1] = box_muller(u1, u2);
    cached_normal_ = z1;
    has_cached_normal_ = true;
    return z0;
}

double RngStream::exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be positive");
    return -std::log(uniform()) / rate;
}

double RngStream::uniform_at(std::uint64_t index) const {
    // two 64-bit draws per block, as in next_u64
    const auto block = Philox4x32::apply(counter_for(index / 2), key_);
    const int w = static_cast<int>(index % 2) * 2;
    return bits_to_open_unit((static_cast<std::uint64_t>(block[w]) << 32) | block[w + 1]);
}

double RngStream::normal_at(std::uint64_t index) const {
    // one Box-Muller pair per block, as in normal()
    const auto block = Philox4x32::apply(counter_for(index / 2), key_);
    const double u1 = bits_to_open_unit((static_cast<std::uint64_t>(block[0]) << 32) | block[1]);
    const double u2 = bits_to_open_unit((static_cast<std::uint64_t>(block[2]) << 32) | block[3]);
    const auto z = box_muller(u1, u2);
    return index % 2 == 0 ? z.first : z.second;
}

}  // namespace markedtime
