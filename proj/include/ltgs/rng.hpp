// Deterministic counter-based random number generation.
//
// Every stochastic stage of the pipeline derives its draws from a
// SplitMix64 stream keyed by (seed, stream id). Streams with distinct
// ids are independent, so parallel workers can draw from disjoint
// deterministic streams regardless of scheduling. Gaussian variates use
// Box-Muller on the raw uniforms; std::normal_distribution is avoided on
// purpose because its output is implementation-defined.

#pragma once

#include <cmath>
#include <cstdint>

namespace ltgs {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller; consumes exactly two uniforms
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

// Fixed 64-bit mix for deriving substream keys. Distinct (seed, id) pairs
// map to well-separated SplitMix64 states.
inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t id) {
    std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL + (id << 1));
    z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
    z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
    return z ^ (z >> 33);
}

inline SplitMix64 substream(std::uint64_t seed, std::uint64_t id) {
    return SplitMix64(mix_key(seed, id));
}

}  // namespace ltgs
