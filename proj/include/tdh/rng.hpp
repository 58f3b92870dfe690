#pragma once

#include <cmath>
#include <cstdint>

namespace tdh {

// splitmix64: tiny, well-mixed, and identical on every platform.  We do not
// use <random> distributions anywhere because their output is
// implementation-defined and would break byte-identical reruns.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (no cached spare; order-stable).
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

private:
    std::uint64_t state_;
};

// Stable per-row seed derivation.  Keyed on the absolute bias expressed in
// microvolts so a sub-range sweep reproduces exactly the rows of a full sweep.
inline std::uint64_t derive_seed(std::uint64_t master, std::int64_t key) {
    SplitMix64 mix(master ^ (static_cast<std::uint64_t>(key) * 0xD6E8FEB86659FD93ULL));
    mix.next_u64();
    return mix.next_u64();
}

}  // namespace tdh
