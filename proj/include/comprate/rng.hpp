#pragma once

#include <cstdint>

namespace comprate {

// SplitMix64 finalizer: bijective 64-bit avalanche mix.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kSeedStride = 0x9E3779B97F4A7C15ULL;

// Seed of sub-stream `stream` derived from `seed`. Pure; distinct streams
// decorrelate, so every consumer that takes a seed stays a pure function
// of it. Used both to split trial seeds off a master seed and to split the
// independent draws inside one trial.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(seed + (stream + 1) * kSeedStride);
}

// Counter-based generator (SplitMix64). The i-th output is a pure function
// of (seed, i); no global state anywhere.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next_u64() noexcept {
        state_ += kSeedStride;
        return mix64(state_);
    }

    // Uniform in [0, 1), 53 bits.
    double next_unit() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, bound), bound >= 1. Rejection from the top, no modulo bias.
    std::uint64_t next_below(std::uint64_t bound) noexcept {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    bool next_bernoulli(double p) noexcept { return next_unit() < p; }

    std::int8_t next_sign() noexcept {
        return (next_u64() & 1u) ? std::int8_t{1} : std::int8_t{-1};
    }

private:
    std::uint64_t state_;
};

}  // namespace comprate
