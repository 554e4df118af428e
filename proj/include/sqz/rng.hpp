// rng.hpp — Counter-based splittable random streams: every variate is a pure
// function of (key, counter), so trajectories reproduce bitwise under any
// parallel execution order.
#pragma once

#include <cstdint>
#include <cmath>

namespace sqz::rng {

inline std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct CounterStream {
    std::uint64_t key;

    explicit CounterStream(std::uint64_t key_) : key(key_) {}
    CounterStream(std::uint64_t seed, std::uint64_t stream)
        : key(mix(seed ^ mix(stream + 0xd1b54a32d192ed03ULL))) {}

    std::uint64_t bits(std::uint64_t counter) const { return mix(key ^ mix(counter)); }

    // uniform in (0, 1]
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 1.0) * 0x1.0p-53;
    }

    // standard normal via Box-Muller, one variate per counter
    double normal(std::uint64_t counter) const {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    bool coin(std::uint64_t counter) const { return bits(counter) & 1ULL; }
};

} // namespace sqz::rng
