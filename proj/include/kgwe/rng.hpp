#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string_view>

namespace kgwe {

// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed of the independent stream `stream` under `seed`. Used to give every
// start vertex, worker, or user its own reproducible generator.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

// Seed of a named pipeline stage ("walk", "train", ...) under a global seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : stage) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return derive_seed(seed, h);
}

using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits. Unlike
// std::uniform_real_distribution this is identical across standard libraries.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Slight modulo bias is irrelevant for n << 2^64.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    return rng() % n;
}

// Fisher-Yates with uniform_below, for shuffles reproducible across platforms.
template <class It>
void shuffle(It first, It last, Rng& rng) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = uniform_below(rng, i);
        std::iter_swap(first + (i - 1), first + j);
    }
}

}  // namespace kgwe
