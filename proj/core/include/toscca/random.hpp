#pragma once

#include "toscca/core.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace toscca {

using Rng = std::mt19937_64;

/// Independent stream seed for (seed, stream), via the splitmix64 finalizer.
/// Parallel work derives its randomness from this, never from execution order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Unbiased integer in [0, bound).
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);

/// Fisher-Yates permutation of 0..n-1.
std::vector<Index> random_permutation(Index n, Rng& rng);

}  // namespace toscca
