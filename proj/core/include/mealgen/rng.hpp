#pragma once

#include <cstdint>
#include <vector>

#include "mealgen/math.hpp"

namespace mealgen {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stable stream derivation: seeds for scene s / attempt a never depend on
// how many other scenes exist, so adding scenes cannot perturb earlier ones.
inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0) {
    uint64_t s = master;
    uint64_t h = splitmix64(s);
    s = h ^ (a * 0xD1B54A32D192ED03ULL + 0x9E3779B97F4A7C15ULL);
    h = splitmix64(s);
    s = h ^ (b * 0x8CB92BA72F3D8DD7ULL + 0x2545F4914F6CDD1DULL);
    return splitmix64(s);
}

// xoshiro256** with splitmix64 seeding. Hand-rolled (and the distributions
// below too) so equal seeds give identical streams on every platform;
// <random> distributions are implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // [0, n), unbiased via rejection
    uint64_t uniform_index(uint64_t n) {
        if (n == 0) return 0;
        const uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    int64_t uniform_int(int64_t lo, int64_t hi) {  // inclusive bounds
        return lo + static_cast<int64_t>(uniform_index(static_cast<uint64_t>(hi - lo + 1)));
    }

    // Uniform over SO(3) (Shoemake's subgroup algorithm).
    Quat uniform_rotation() {
        const double u1 = uniform(), u2 = uniform(), u3 = uniform();
        const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
        const double t1 = 2.0 * kPi * u2, t2 = 2.0 * kPi * u3;
        return Quat{b * std::cos(t2), a * std::sin(t1), a * std::cos(t1), b * std::sin(t2)};
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n), in draw order (partial Fisher-Yates).
    std::vector<size_t> sample_without_replacement(size_t n, size_t k) {
        std::vector<size_t> pool(n);
        for (size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<size_t> out;
        out.reserve(k);
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(uniform_index(n - i));
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
    uint64_t state_[4];
};

} // namespace mealgen
