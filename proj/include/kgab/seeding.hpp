#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace kgab {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Per-item seed; independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view key) noexcept {
    return splitmix64(master ^ splitmix64(fnv1a64(key)));
}

using Engine = std::mt19937_64;

/// Uniform integer in [0, bound). Rejection sampling keeps the result identical on every
/// standard library, unlike std::uniform_int_distribution.
inline std::uint64_t uniform_below(Engine& engine, std::uint64_t bound) {
    const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - bound + 1) % bound;
    for (;;) {
        const std::uint64_t r = engine();
        if (r >= limit) return r % bound;
    }
}

}  // namespace kgab
