#pragma once

#include <cstdint>
#include <random>

namespace dplms {

using Rng = std::mt19937_64;

// Named substreams derived from a master seed. Values are part of the
// reproducibility contract; do not renumber.
enum class Stream : std::uint64_t {
    topology = 1,
    profiles = 2,
    run = 3,
    pilot = 4,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based seed for substream `stream`, element `index`. Independent of
/// scheduling, so run k always gets the same seed whatever the worker count.
constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index = 0) noexcept {
    return mix64(mix64(mix64(master) ^ static_cast<std::uint64_t>(stream)) + index);
}

}  // namespace dplms
