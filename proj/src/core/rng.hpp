#pragma once

#include <cstdint>

namespace ov {

// splitmix64: used to expand seeds and derive independent streams.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

// xoshiro256**, seeded through splitmix64. Portable and fully deterministic:
// the same seed produces the same stream on every platform.
struct Xoshiro256ss {
    uint64_t s[4];

    explicit Xoshiro256ss(uint64_t seed) {
        SplitMix64 sm(seed);
        s[0] = sm.next();
        s[1] = sm.next();
        s[2] = sm.next();
        s[3] = sm.next();
    }

    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    uint64_t next() {
        uint64_t result = rotl(s[1] * 5, 7) * 9;
        uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// Decorrelated child seed for a named stream of a base seed.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
    SplitMix64 sm(base ^ (0xD1B54A32D192ED03ull * (stream + 1)));
    return sm.next();
}

}  // namespace ov
