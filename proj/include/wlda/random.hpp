#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

namespace wlda {

/// Deterministic, implementation-independent PRNG utilities.
///
/// The standard <random> engines are portable but the distributions are not;
/// reports in this project are contractually byte-identical across platforms,
/// so every random draw goes through these helpers.

/// splitmix64 step: advances the state and returns the next 64-bit output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Hash-combines seed material into a fresh stream seed, so that
/// (base, repeat, rate, role) tuples give decorrelated streams.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0, std::uint64_t d = 0) {
    std::uint64_t s = a;
    splitmix64(s);
    s ^= b + 0x9e3779b97f4a7c15ULL;
    splitmix64(s);
    s ^= c + 0x7f4a7c159e3779b9ULL;
    splitmix64(s);
    s ^= d + 0x2545f4914f6cdd1dULL;
    return splitmix64(s);
}

/// Minimal counter-based RNG over splitmix64; value semantics, trivially
/// copyable, stable output for a given seed on every platform.
class rng {
public:
    explicit rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0, bound) without modulo bias (rejection sampling).
    std::uint64_t next_below(std::uint64_t bound) {
        // largest multiple of bound that fits in 64 bits
        const std::uint64_t limit = bound * ((~0ULL) / bound);
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % bound;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (both values used alternately).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace wlda
