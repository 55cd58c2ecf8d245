#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gem {

// splitmix64 finalizer, used to whiten sub-seed derivation
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// derive an independent stream seed from (root seed, label); all randomness
// in a run flows from one root seed through labeled derivation
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    std::uint64_t h = mix64(seed);
    for (char c : label)
        h = mix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                                 std::uint64_t index) {
    return mix64(derive_seed(seed, label) ^ mix64(index));
}

using Rng = std::mt19937_64;

}  // namespace gem
