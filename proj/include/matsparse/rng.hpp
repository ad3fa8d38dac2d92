#pragma once

#include <cstdint>

namespace matsparse {

/// SplitMix64 generator (Steele, Lea & Flood; the java.util.SplittableRandom
/// mixer). Chosen as the project-wide generator because it is seedable,
/// portable (pure 64-bit integer arithmetic, bit-identical on every
/// platform), and its 8-byte state keeps per-copy sampler records small.
class SplitMix64 {
public:
    SplitMix64() = default;
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 random bits. One call consumes exactly
    /// one 64-bit variate.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_ = 0;
};

/// Derives the seed for substream `k` of a base seed: the (k+1)-th output
/// of the SplitMix64 sequence started at `seed`. Parallel sampler copy k is
/// seeded with split_seed(seed, k), giving statistically independent,
/// reproducible substreams.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + (k + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace matsparse
