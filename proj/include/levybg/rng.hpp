#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace levybg {

// SplitMix64 output function. Used both to derive independent sub-seeds
// (stream member k of a base seed) and to initialize the main engine state.
inline std::uint64_t splitmix64_at(std::uint64_t state) {
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Sub-seed for stream `index` of `base`: the index-th member of the
// SplitMix64 sequence started at `base`. Distinct indices give distinct,
// decorrelated seeds; reproducible across platforms.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64_at(base + (index + 1) * 0x9E3779B97F4A7C15ull);
}

// xoshiro256++ with hand-rolled variate transforms. std:: distributions are
// not pinned across library versions; these are, which keeps the seed
// determinism contract meaningful.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) {
            s += 0x9E3779B97F4A7C15ull;
            w = splitmix64_at(s);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0,1), 53-bit resolution.
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (a,b) up to endpoint resolution.
    double uniform(double a, double b) { return a + (b - a) * u01(); }

    // Exponential(1); strictly positive draws (W=0 would blow up the
    // stable sampler's power transform).
    double exponential() {
        double w;
        do {
            w = -std::log1p(-u01());
        } while (w <= 0.0);
        return w;
    }

    // Standard normal via Box-Muller, second draw cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1;
        do {
            u1 = 1.0 - u01();  // (0,1]
        } while (u1 <= 0.0);
        const double u2 = u01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    bool has_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace levybg
