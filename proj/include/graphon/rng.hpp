#pragma once

// Counter-based randomness. Each edge (i,j) of a sampled graph gets its own
// uniform draw keyed by (seed, min, max), so samples are reproducible
// regardless of traversal order or thread count.

#include <cstdint>

namespace graphon {

// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform in [0,1) determined by (seed, unordered pair {i,j}).
inline double edge_uniform(std::uint64_t seed, std::uint64_t i, std::uint64_t j) {
    if (i > j) { std::uint64_t t = i; i = j; j = t; }
    std::uint64_t h = mix64(seed ^ 0x8c67c0d8e51aa25bULL);
    h = mix64(h ^ (i * 0xd6e8feb86659fd93ULL));
    h = mix64(h ^ (j * 0xa3b195354a39b70dULL));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Sequential splitmix64 stream for scrambling and restarts.
class Splitmix {
public:
    explicit Splitmix(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in {0, ..., n-1} by rejection; unbiased.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do { x = next(); } while (x >= limit);
        return x % n;
    }

private:
    std::uint64_t state_;
};

}  // namespace graphon
