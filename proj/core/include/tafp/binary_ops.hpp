#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tafp/rng.hpp"

namespace tafp {

using BitString = std::vector<std::uint8_t>;

/// Swaps the tails after a uniformly drawn cut in [1, n-1].
/// Throws Error(kLengthMismatch).
std::pair<BitString, BitString> single_point_crossover(const BitString& a, const BitString& b,
                                                       Rng& rng);

/// Flips each bit independently with probability p.
void flip_mutation(BitString& bits, Rng& rng, double p);

/// Bits set independently with a density drawn uniformly in [0, max_density].
BitString random_bits(std::size_t n, double max_density, Rng& rng);

std::size_t popcount(const BitString& bits);

}  // namespace tafp
