#include "tafp/binary_ops.hpp"

#include <algorithm>

#include "tafp/error.hpp"

namespace tafp {

std::pair<BitString, BitString> single_point_crossover(const BitString& a, const BitString& b,
                                                       Rng& rng) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch, "parents differ in length");
  }
  if (a.size() < 2) return {a, b};
  const auto cut = static_cast<std::ptrdiff_t>(1 + rng.index(a.size() - 1));
  BitString c1(a.begin(), a.begin() + cut);
  c1.insert(c1.end(), b.begin() + cut, b.end());
  BitString c2(b.begin(), b.begin() + cut);
  c2.insert(c2.end(), a.begin() + cut, a.end());
  return {std::move(c1), std::move(c2)};
}

void flip_mutation(BitString& bits, Rng& rng, double p) {
  for (auto& b : bits) {
    if (rng.uniform() < p) b = b ? 0 : 1;
  }
}

BitString random_bits(std::size_t n, double max_density, Rng& rng) {
  const double density = rng.uniform() * max_density;
  BitString g(n);
  for (auto& b : g) b = rng.uniform() < density ? 1 : 0;
  return g;
}

std::size_t popcount(const BitString& bits) {
  return static_cast<std::size_t>(
      std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

}  // namespace tafp
