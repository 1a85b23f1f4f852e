#pragma once

#include <cstdint>
#include <random>

namespace cems {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent generator for work unit `counter` of a run seeded with `seed`.
/// Serial and parallel runs that use the same (seed, counter) pairs see the
/// same random streams.
inline Rng stream_rng(std::uint64_t seed, std::uint64_t counter) {
    std::seed_seq seq{splitmix64(seed), splitmix64(seed ^ splitmix64(counter + 1)), counter};
    return Rng(seq);
}

}  // namespace cems
