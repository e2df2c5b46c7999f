#pragma once

#include <cstdint>

namespace ndv {

// splitmix64 finalizer. Bijective on 64 bits with full avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seeded 64-bit hash: evaluates the splitmix64 stream at an offset derived
// from the seed, so distinct seeds act as independent hash functions.
inline std::uint64_t hash64(std::uint64_t x, std::uint64_t seed) {
    return mix64(x + (seed + 1) * 0x9e3779b97f4a7c15ULL);
}

// Deterministic derived seed for sub-streams (per-row hashes, per-machine RNGs).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    return hash64(tag ^ 0xa0761d6478bd642fULL, base);
}

}  // namespace ndv
