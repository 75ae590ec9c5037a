#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace radar {

// splitmix64 finalizer; used to derive independent sub-streams from one seed.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(seed ^ mix_seed(stream));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return mix_seed(seed, h);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline Rng make_rng(std::uint64_t seed, std::string_view tag) {
    return Rng(mix_seed(seed, tag));
}

inline Rng make_rng(std::uint64_t seed, std::string_view tag, std::uint64_t stream) {
    return Rng(mix_seed(mix_seed(seed, tag), stream));
}

}  // namespace radar
