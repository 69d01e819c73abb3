#ifndef PATCHLINK_RNG_HPP
#define PATCHLINK_RNG_HPP

#include <cstdint>
#include <random>

namespace patchlink {

// splitmix64 step; used both as a stream mixer and to expand one seed
// into several independent ones.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic sub-seed for a named stream (frame number, purpose tag, ...).
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + (stream << 1));
    return splitmix64(s);
}

// Uniform double in [0,1) with 53 random bits. std::uniform_real_distribution
// is implementation-defined, so roll the standard ldexp construction to keep
// traces reproducible across standard libraries.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Unbiased draw in [0, n) by rejection; deterministic for a given engine state.
inline uint64_t bounded(std::mt19937_64& gen, uint64_t n) {
    if (n == 0) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = gen();
    } while (x >= limit);
    return x % n;
}

} // namespace patchlink

#endif // PATCHLINK_RNG_HPP
