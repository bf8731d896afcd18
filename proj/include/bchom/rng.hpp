#pragma once

#include <cstdint>

#include "bchom/common.hpp"

namespace bchom {

/// Deterministic 64-bit generator (SplitMix64). The standard library
/// distributions are implementation-defined, so all sampling goes through
/// this type to keep trial outputs bit-identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Unbiased uniform integer in [0, bound) via Lemire rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw Error("Rng::below called with zero bound");
        std::uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0ULL - bound) % bound;
            while (lo < threshold) {
                x = next();
                m = static_cast<__uint128_t>(x) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform integer in [lo, hi] inclusive.
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
        return lo + below(hi - lo + 1);
    }

private:
    std::uint64_t state_;
};

/// Avalanche mix used for substream derivation.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based substream seed: a pure function of (master, trial, ego), so
/// parallel execution order cannot change any sampled value.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t ego) {
    std::uint64_t h = mix64(master + 0x9E3779B97F4A7C15ULL);
    h = mix64(h ^ (trial + 0xD1B54A32D192ED03ULL));
    h = mix64(h ^ (ego + 0x8CB92BA72F3D8DD7ULL));
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial) {
    return derive_seed(master, trial, 0x5851F42D4C957F2DULL);
}

}  // namespace bchom
