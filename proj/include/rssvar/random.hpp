#pragma once

#include <cstdint>
#include <random>

namespace rssvar {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser.
constexpr std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Seed of sub-stream `stream` of `master`:
///   splitmix64(splitmix64(master) ^ (stream * 0xD1B54A32D192ED03)).
/// Every parallel task draws from its own derived stream, so results do not
/// depend on scheduling or on the number of worker threads.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream)
{
    return splitmix64(splitmix64(master) ^ (stream * 0xD1B54A32D192ED03ull));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream) { return Rng(derive_seed(master, stream)); }

}  // namespace rssvar
