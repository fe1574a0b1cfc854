#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ecprune {

// All randomness in the library goes through these helpers instead of the
// standard <random> distributions, whose output is implementation-defined.
// This keeps seeded runs reproducible across compilers and platforms.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from (seed, salt).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= salt * 0xD1B54A32D192ED03ULL;
    std::uint64_t b = splitmix64(s);
    return a ^ (b + 0x9E3779B97F4A7C15ULL);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

// Uniform double in [0, 1), 53 random bits.
inline double uniform_double(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform_real(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform_double(g);
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_below(std::mt19937_64& g, std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = g();
    } while (x >= limit);
    return x % n;
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& g) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_below(g, i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace ecprune
