#pragma once

#include <cstdint>

// Deterministic, platform-independent RNG primitives. All randomness in the
// library flows through these so that identical seeds give identical results
// on every platform: splitmix64 for seed expansion/mixing, xoshiro256** as
// the sequential generator (Blackman/Vigna reference update rules).

namespace semvt {

constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += kGolden64;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stateless mix of one 64-bit word (single splitmix64 step from `x`).
inline std::uint64_t mix64(std::uint64_t x) {
    std::uint64_t s = x;
    return splitmix64_next(s);
}

// Derives an independent substream seed from (master, index). Counter-based:
// no sequential state, so substreams can be created in any order or in
// parallel and always match.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master ^ mix64(index * kGolden64 + 1));
}

inline double u64_to_unit_double(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53; // [0,1)
}

// Stateless uniform in [0,1) for (seed, counter); used for per-packet and
// per-element erasure draws.
inline double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
    return u64_to_unit_double(mix64(seed ^ mix64(counter + kGolden64)));
}

class Xoshiro256ss {
public:
    explicit Xoshiro256ss(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform integer in [0, bound). Plain modulo: the negligible bias does
    // not matter here, but the exact reduction rule is frozen because
    // interleaving permutations must be byte-identical across builds.
    std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

    double next_unit() { return u64_to_unit_double(next()); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

} // namespace semvt
