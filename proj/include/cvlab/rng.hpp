#ifndef CVLAB_RNG_HPP
#define CVLAB_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace cvlab {

/**
 * SplitMix64 generator (Steele, Lea and Flood 2014).
 *
 * Output k of a generator seeded with s is mix64(s + (k+1)·0x9E3779B97F4A7C15),
 * so the stream is a pure function of the seed and a counter. Every result in
 * the library draws from streams obtained with derive_seed(), never from
 * <random> engines or distributions, whose output is implementation-defined.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept;

    /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
    std::uint64_t uniform_index(std::uint64_t bound) noexcept;

    /// Standard normal draw (Marsaglia polar method).
    double normal() noexcept;

    bool bernoulli(double p) noexcept { return uniform01() < p; }

private:
    std::uint64_t state_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// FNV-1a hash of a purpose tag.
std::uint64_t tag_hash(std::string_view tag) noexcept;

/// Seed of the stream identified by (seed, purpose tag, index).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) noexcept;

/// Same, with two indices (e.g. replicate and scheme).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t i,
                          std::uint64_t j) noexcept;

}  // namespace cvlab

#endif  // CVLAB_RNG_HPP
