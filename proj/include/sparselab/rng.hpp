#pragma once

#include <cstdint>
#include <random>

namespace sparselab {

/// Default seed used by every seeded entry point in the library.
inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

// Thin wrapper around mt19937_64.  All sampling helpers below are written
// against the raw 64-bit stream so results do not depend on the standard
// library's (implementation-defined) distribution algorithms.
class Rng {
public:
    explicit Rng(std::uint64_t seed = kDefaultSeed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, bound) via rejection sampling; bound >= 1.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t next_in(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(
                        next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool next_bool() { return (engine_() & 1u) != 0; }

    /// Derive an independent stream for sub-task `k` of the task seeded by
    /// `seed`.  splitmix64-style mixing so nearby (seed, k) pairs decorrelate.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t k) {
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (k + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace sparselab
