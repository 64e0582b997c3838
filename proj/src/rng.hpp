#pragma once

#include <cstdint>

namespace sv::detail {

// splitmix64; self-contained so seeded outputs never depend on the standard
// library's distribution internals.
struct Rng {
    uint64_t state;

    uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double range(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int index(int n) { return static_cast<int>(next() % static_cast<uint64_t>(n)); }
};

inline uint64_t mix(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    Rng rng{seed ^ (a * 0x9E3779B97F4A7C15ull) ^ (b * 0xC2B2AE3D27D4EB4Full) ^
            (c * 0x165667B19E3779F9ull)};
    return rng.next();
}

}  // namespace sv::detail
