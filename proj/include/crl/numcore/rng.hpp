#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace crl {

/// Counter-based generator: SplitMix64 (Steele, Lea & Flood 2014).
///
/// The whole state is one 64-bit counter, so generator state is trivially
/// checkpointed and identical across platforms. Independent streams are derived
/// with `split`, which hashes (counter, stream id) into a fresh counter.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    /// Uniform in (0, 1].
    double uniform_open_low();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n);
    bool bernoulli(double p) { return uniform() < p; }
    /// Standard normal via Box-Muller; consumes exactly two draws.
    double normal();

    Rng split(std::uint64_t stream) const;

    std::uint64_t state() const { return state_; }
    void set_state(std::uint64_t s) { state_ = s; }

    friend bool operator==(const Rng&, const Rng&) = default;

private:
    std::uint64_t state_;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

/// Inverse-CDF draw from a discrete distribution given by non-negative weights
/// that sum to one (within rounding; the last index absorbs the remainder).
std::size_t sample_categorical(std::span<const double> probs, Rng& rng);

}  // namespace crl
