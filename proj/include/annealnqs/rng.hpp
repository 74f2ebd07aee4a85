#pragma once

#include <cstdint>
#include <random>

namespace annealnqs {

using Rng = std::mt19937_64;

// The standard distributions are implementation-defined; these helpers keep
// sampled streams identical across standard libraries.

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n), unbiased (rejection on the tail).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % n;
}

inline bool coin_flip(Rng& rng) { return (rng() >> 63) != 0; }

/// splitmix64 finalizer; decorrelates streams seeded by base + counter.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace annealnqs
