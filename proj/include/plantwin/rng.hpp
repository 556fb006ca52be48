#pragma once

#include <cstdint>
#include <random>

namespace plantwin {

// splitmix64: used to derive independent child seeds from a parent seed so
// that every subsystem (id assignment, pool generation, tie-breaking, ...)
// gets its own deterministic stream.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
    return splitmix64(parent ^ splitmix64(stream));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

// FNV-1a over raw bytes. Stays local: used to key per-object budget state
// across tasks without ever disclosing the value.
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace plantwin
