#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace stegsan {

// Deterministic seeded generator. The full algorithm is pinned here so that
// identical seeds give identical streams on every platform:
//   - core: std::mt19937_64 seeded directly with the 64-bit seed
//   - uniform doubles: (x >> 11) * 2^-53, i.e. 53 random mantissa bits
//   - normals: Box-Muller on two uniforms, second value cached
//   - child streams: seed' = splitmix64(splitmix64(seed) + stream_tag)
// std::uniform_real_distribution / std::normal_distribution are not used
// because their output is implementation-defined.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() {
        return (next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        // u1 in (0,1] so log(u1) is finite.
        double u1 = ((next_u64() >> 11) + 1) * 0x1.0p-53;
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Independent child stream; deterministic in (seed, tag).
    SeededRng split(std::uint64_t tag) const {
        return SeededRng(splitmix64(splitmix64(seed_) + tag));
    }

    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace stegsan
