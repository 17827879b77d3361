#include <stdexcept>

#include "doctest.h"
#include "rainbow/generators.hpp"
#include "rainbow/oracle.hpp"

using namespace rainbow;

namespace {

LatinArray make_array(int n, int k, std::vector<int> grid) {
  LatinArray a;
  a.n = n;
  a.k = k;
  a.grid = std::move(grid);
  return a;
}

}  // namespace

TEST_CASE("count_transversals on reference instances") {
  CHECK(count_transversals(z2k_table(1)) == 0);
  CHECK(count_transversals(make_array(1, 1, {0})) == 1);
  // Frozen from count_transversals_exhaustive (cross-checked below).
  CHECK(count_transversals(cyclic_latin(3)) == 3);
  CHECK(count_transversals(cyclic_latin(5)) == 15);
  CHECK(count_transversals(cyclic_latin(7)) == 133);
}

TEST_CASE("exhaustive oracle values") {
  CHECK(count_transversals_exhaustive(z2k_table(2)) == 0);
  CHECK(count_transversals_exhaustive(make_array(2, 3, {0, 1, 1, 2})) == 1);
  CHECK(count_transversals_exhaustive(make_array(1, 1, {0})) == 1);
  CHECK(count_transversals_exhaustive(cyclic_latin(3)) == 3);
  CHECK(count_transversals_exhaustive(cyclic_latin(5)) == 15);
  CHECK(count_transversals_exhaustive(cyclic_latin(7)) == 133);
  CHECK_THROWS_AS(count_transversals_exhaustive(cyclic_latin(9)), std::invalid_argument);
}

TEST_CASE("oracle cross-validation on random arrays") {
  for (int n = 2; n <= 7; ++n) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const LatinArray a = random_latin(n, seed, 200);
      CHECK(count_transversals(a) == count_transversals_exhaustive(a));
      const LatinArray split = split_colours(a, std::min(n * n, n + 3), seed + 1);
      CHECK(count_transversals(split) == count_transversals_exhaustive(split));
    }
  }
}

TEST_CASE("find_transversal_exact agrees with the count") {
  CHECK_FALSE(find_transversal_exact(z2k_table(3)).has_value());  // count 0

  const LatinArray all_distinct = split_colours(cyclic_latin(4), 16, 2);
  auto found = find_transversal_exact(all_distinct);
  REQUIRE(found.has_value());
  CHECK(found->size() == 4);
  CHECK(verify_rainbow_perfect(to_graph(all_distinct), *found));

  auto cyc3 = find_transversal_exact(cyclic_latin(3));
  REQUIRE(cyc3.has_value());
  CHECK(verify_rainbow_perfect(to_graph(cyclic_latin(3)), *cyc3));
}

TEST_CASE("find_transversal_exact returns none iff count is zero") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    for (int n : {4, 5, 6}) {
      const LatinArray a = random_latin(n, seed, 150);
      CHECK(find_transversal_exact(a).has_value() == (count_transversals(a) > 0));
    }
  }
}

TEST_CASE("max_rainbow_matching_exact on reference instances") {
  CHECK(max_rainbow_matching_exact(to_graph(z2k_table(1))).size() == 1);
  CHECK(max_rainbow_matching_exact(ColouredBipartiteGraph(3, 3, 1, {})).size() == 0);
  CHECK(max_rainbow_matching_exact(to_graph(cyclic_latin(3))).size() == 3);
}

TEST_CASE("max_rainbow_matching_exact result is itself a rainbow matching") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const LatinArray a = random_latin(5, seed, 100);
    const auto g = to_graph(a);
    const RainbowMatching best = max_rainbow_matching_exact(g);
    CHECK(is_rainbow_matching(g, best));
    // At least as large as the transversal indicator.
    const bool has_transversal = count_transversals(a) > 0;
    CHECK((best.size() == 5) == has_transversal);
  }
}

TEST_CASE("max_rainbow_matching_exact guards against oversized instances") {
  CHECK_THROWS_AS(max_rainbow_matching_exact(to_graph(cyclic_latin(9)), 8),
                  std::invalid_argument);
}

TEST_CASE("z2k family stays transversal-free up to k_half = 4") {
  for (int k_half = 1; k_half <= 4; ++k_half) {
    CHECK(count_transversals(z2k_table(k_half)) == 0);
  }
}
