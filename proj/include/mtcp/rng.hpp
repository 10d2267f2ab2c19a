#pragma once

// Portable seeded randomness: xoshiro256** streams seeded through splitmix64.
// Problem generators must be bit-reproducible from a 64-bit seed regardless of
// platform, so no std::*_distribution is used anywhere.

#include <cstdint>

namespace mtcp {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Xoshiro256ss {
public:
    explicit Xoshiro256ss(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    std::uint64_t next() {
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

    /// Uniform draw from the open interval (0,1); an exact 0.0 is redrawn.
    double uniform_open01() {
        for (;;) {
            double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
            if (u != 0.0) return u;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

/// Stream `tag` of master seed `seed`. The seed is run through one splitmix64
/// round before the tag is folded in, so nearby master seeds (base, base+1, ...)
/// do not collide with each other's streams.
inline Xoshiro256ss substream(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t sm = seed;
    std::uint64_t mixed = splitmix64_next(sm);
    return Xoshiro256ss(mixed ^ (0xD2B74407B1CE6E93ULL * (tag + 1)));
}

}  // namespace mtcp
