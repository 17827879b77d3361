#pragma once

#include <cstdint>
#include <optional>

#include "rainbow/core.hpp"

namespace rainbow {

// Exact transversal count via row-by-row backtracking with a column bitmask
// and a colour-seen stamp (colour ids may exceed n, up to n^2). Practical for
// n up to about 10.
std::uint64_t count_transversals(const LatinArray& array);

// Independent oracle: walks all n! column permutations. Requires n <= 8.
std::uint64_t count_transversals_exhaustive(const LatinArray& array);

// First transversal in lexicographic row order, or nullopt when none exists.
std::optional<RainbowMatching> find_transversal_exact(const LatinArray& array);

// Maximum-cardinality rainbow matching by branch and bound over A-vertices
// with the remaining-rows prune. Guarded by an edge-count cap; throws
// std::invalid_argument beyond it.
RainbowMatching max_rainbow_matching_exact(const ColouredBipartiteGraph& graph,
                                           int max_size_a = 16);

}  // namespace rainbow
