#pragma once

#include <cstdint>

#include "rainbow/core.hpp"

namespace rainbow {

// Instance families used by tests and experiment sweeps.
struct GenSpec {
  int n = 1;
  int target_colours = -1;  // -1: keep the family's natural colour count
  enum class Family { Cyclic, Z2k, RandomLatin, Split } family = Family::Cyclic;
  std::uint64_t seed = 0;
  std::int64_t mixing_steps = -1;  // -1: default n^3
};

// grid[r][c] = (r + c) mod n, k = n.
LatinArray cyclic_latin(int n);

// Addition table of Z_{2k}; has no transversal for every k_half >= 1.
LatinArray z2k_table(int k_half);

// Cyclic table scrambled by proper-colouring-preserving Jacobson-Matthews
// moves. One move = one improper walk brought back to a proper square.
// Deterministic given the seed; 0 steps returns the cyclic table.
LatinArray random_latin(int n, std::uint64_t seed, std::int64_t mixing_steps);
inline LatinArray random_latin(int n, std::uint64_t seed) {
  return random_latin(n, seed, static_cast<std::int64_t>(n) * n * n);
}

// Raises the colour count to exactly target_colours by repeatedly recolouring
// one cell of the currently largest colour class (ties: smallest colour id,
// cell uniform by seed) with a fresh colour. Throws std::invalid_argument when
// target_colours is outside [k(array), n^2] or below n.
LatinArray split_colours(const LatinArray& array, int target_colours, std::uint64_t seed);

LatinArray generate(const GenSpec& spec);

}  // namespace rainbow
