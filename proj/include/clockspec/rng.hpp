#pragma once

// Counter-based random streams.  Every draw is a pure function of
// (key, counter), so parallel consumers can evaluate any index in any
// order and always see the same values.  The mixing function is the
// splitmix64 output permutation; evaluating it on key + counter*GAMMA
// reproduces the splitmix64 sequence seeded at `key` and jumped to
// `counter`.

#include <cstdint>

namespace clockspec::rng {

inline constexpr std::uint64_t GAMMA = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// Derive an independent stream key for (seed, purpose tag, realization).
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t tag,
                                std::uint64_t realization) {
    std::uint64_t k = mix64(seed + GAMMA * (tag + 1));
    return mix64(k + GAMMA * (realization + 0x632BE59BD9B4E019ULL));
}

inline std::uint64_t at(std::uint64_t key, std::uint64_t counter) {
    return mix64(key + GAMMA * counter);
}

// Uniform in [0, 1), 53 random bits.
inline double uniform01(std::uint64_t key, std::uint64_t counter) {
    return static_cast<double>(at(key, counter) >> 11) * 0x1.0p-53;
}

// Uniform in [-1, 1].
inline double uniform_pm1(std::uint64_t key, std::uint64_t counter) {
    return 2.0 * uniform01(key, counter) - 1.0;
}

inline int bit(std::uint64_t key, std::uint64_t counter) {
    return static_cast<int>(at(key, counter) >> 63);
}

}  // namespace clockspec::rng
