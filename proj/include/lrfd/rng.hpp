#pragma once

#include <cstdint>
#include <cmath>
#include <initializer_list>

namespace lrfd {

// Deterministic 64-bit PRNG used everywhere randomness is needed, so that
// identical seeds reproduce identical matrices, index sets and experiment
// cells bit-for-bit. The generator is xoshiro256** (Blackman & Vigna,
// https://prng.di.unimi.it/xoshiro256starstar.c), state-seeded with
// splitmix64 as the reference implementation recommends.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound) by rejection, bias-free.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = -bound % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Standard normal via Marsaglia's polar method (pairs are cached).
    double next_gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_double() - 1.0;
            v = 2.0 * next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        cached_ = v * scale;
        have_cached_ = true;
        return u * scale;
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// Folds a base seed with cell coordinates / trial indices into an
// independent stream seed. Used by the experiment runner so every grid
// cell is individually re-runnable.
inline std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = base;
    for (std::uint64_t w : words) {
        std::uint64_t x = h ^ (w + 0x9E3779B97F4A7C15ULL);
        h = Rng::splitmix64(x);
    }
    return h;
}

} // namespace lrfd
