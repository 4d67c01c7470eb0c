#pragma once

#include <cstdint>
#include <random>

namespace rofanova {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of an independent stream, derived from (seed, stream index) only, so
/// results do not depend on which worker draws which stream.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

Rng make_stream(std::uint64_t seed, std::uint64_t stream);

}  // namespace rofanova
