#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace bigeo {

// std::mt19937_64 is fully specified by the standard, but the std:: distributions
// are not. Everything that must be reproducible bit-for-bit draws through these
// helpers instead.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; mixes a seed and a stream id into an independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Uniform integer in [0, n). Rejection sampling, no modulo bias.
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Standard normal via Box-Muller.
double standard_normal(Rng& rng);

/// In-place Fisher-Yates shuffle.
void shuffle(std::span<std::size_t> values, Rng& rng);

}  // namespace bigeo
