#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "rainbow/generators.hpp"
#include "rainbow/matching.hpp"
#include "rainbow/rng.hpp"

using namespace rainbow;

namespace {

BipartiteGraph from_edges(int na, int nb, const std::vector<std::pair<int, int>>& edges) {
  BipartiteGraph g(na, nb);
  for (auto [a, b] : edges) g.add_edge(a, b);
  g.finish();
  return g;
}

BipartiteGraph complete(int na, int nb) {
  BipartiteGraph g(na, nb);
  for (int a = 0; a < na; ++a) {
    for (int b = 0; b < nb; ++b) g.add_edge(a, b);
  }
  g.finish();
  return g;
}

BipartiteGraph random_graph(int na, int nb, double p, std::uint64_t seed) {
  BipartiteGraph g(na, nb);
  Rng rng(seed);
  for (int a = 0; a < na; ++a) {
    for (int b = 0; b < nb; ++b) {
      if (rng.unit() < p) g.add_edge(a, b);
    }
  }
  g.finish();
  return g;
}

// Reference check: full 2^n enumeration of the expansion condition.
bool expansion_brute(const BipartiteGraph& g, const ExpansionSpec& spec) {
  for (std::uint32_t mask = 1; mask < (1u << g.n_a); ++mask) {
    std::vector<char> nbr(g.n_b, 0);
    int size = 0, nbrs = 0;
    for (int a = 0; a < g.n_a; ++a) {
      if (!(mask & (1u << a))) continue;
      ++size;
      for (int b : g.adj[a]) {
        if (!nbr[b]) {
          nbr[b] = 1;
          ++nbrs;
        }
      }
    }
    const double bound = std::min(spec.factor * size, static_cast<double>(spec.cap));
    if (nbrs < bound - 1e-9) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("max_matching on reference instances") {
  CHECK(max_matching(complete(3, 3)).size == 3);
  CHECK(max_matching(from_edges(1, 3, {{0, 0}, {0, 1}, {0, 2}})).size == 1);
  // Six-cycle a0-b0-a1-b1-a2-b2-a0.
  const auto six = from_edges(3, 3, {{0, 0}, {1, 0}, {1, 1}, {2, 1}, {2, 2}, {0, 2}});
  CHECK(max_matching(six).size == 3);
}

TEST_CASE("max_matching size is invariant under vertex relabelling") {
  const auto g = random_graph(9, 9, 0.35, 7);
  const int base = max_matching(g).size;
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<int> pa(g.n_a), pb(g.n_b);
    std::iota(pa.begin(), pa.end(), 0);
    std::iota(pb.begin(), pb.end(), 0);
    for (int i = g.n_a - 1; i > 0; --i) std::swap(pa[i], pa[rng.below(i + 1)]);
    for (int i = g.n_b - 1; i > 0; --i) std::swap(pb[i], pb[rng.below(i + 1)]);
    BipartiteGraph permuted(g.n_a, g.n_b);
    for (int a = 0; a < g.n_a; ++a) {
      for (int b : g.adj[a]) permuted.add_edge(pa[a], pb[b]);
    }
    permuted.finish();
    CHECK(max_matching(permuted).size == base);
  }
}

TEST_CASE("hall_violator on saturable graphs returns none") {
  CHECK_FALSE(hall_violator(complete(2, 2), Side::A).has_value());
  CHECK_FALSE(hall_violator(complete(2, 2), Side::B).has_value());
}

TEST_CASE("hall_violator finds the forced violator") {
  const auto g = from_edges(2, 2, {{0, 0}, {1, 0}});  // both rows see only b0
  const auto s = hall_violator(g, Side::A);
  REQUIRE(s.has_value());
  CHECK(*s == std::vector<int>{0, 1});
}

TEST_CASE("hall_violator is none exactly when max_matching saturates the side") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = random_graph(7, 7, 0.3 + 0.05 * (seed % 5), seed);
    const bool perfect = max_matching(g).size == 7;
    CHECK(hall_violator(g, Side::A).has_value() == !perfect);
    CHECK(hall_violator(g, Side::B).has_value() == !perfect);
  }
}

TEST_CASE("hall_violator certificate really violates Hall") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = random_graph(8, 6, 0.25, seed ^ 0xabc);
    const auto s = hall_violator(g, Side::A);
    if (!s) continue;
    std::vector<char> nbr(g.n_b, 0);
    int nbrs = 0;
    for (int a : *s) {
      for (int b : g.adj[a]) {
        if (!nbr[b]) {
          nbr[b] = 1;
          ++nbrs;
        }
      }
    }
    CHECK(nbrs < static_cast<int>(s->size()));
  }
}

TEST_CASE("expansion_check on reference instances") {
  CHECK(expansion_check(complete(4, 4), Side::A, {2.0, 2}).holds);

  // A perfect matching graph expands by exactly 1 per vertex.
  const auto pm = from_edges(4, 4, {{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  const auto res = expansion_check(pm, Side::A, {2.0, 2});
  REQUIRE_FALSE(res.holds);
  CHECK(res.violator == std::vector<int>{0});  // lexicographically least
  CHECK(res.violator_neighbours == 1);
}

TEST_CASE("expansion_check exact mode agrees with full enumeration") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const int n = 4 + static_cast<int>(seed % 9);  // up to 12
    const auto g = random_graph(n, n, 0.25 + 0.06 * (seed % 6), seed ^ 0x51);
    const ExpansionSpec spec{2.0, std::max(1, 2 * n / 3)};
    const auto res = expansion_check(g, Side::A, spec);
    CHECK(res.exact);
    CHECK(res.holds == expansion_brute(g, spec));
    if (!res.holds) {
      std::vector<char> nbr(g.n_b, 0);
      int nbrs = 0;
      for (int a : res.violator) {
        for (int b : g.adj[a]) {
          if (!nbr[b]) {
            nbr[b] = 1;
            ++nbrs;
          }
        }
      }
      const double bound =
          std::min(spec.factor * res.violator.size(), static_cast<double>(spec.cap));
      CHECK(nbrs < bound);
    }
  }
}

TEST_CASE("expansion_check side B works through the transpose") {
  const auto g = from_edges(3, 2, {{0, 0}, {1, 0}, {2, 0}, {2, 1}});
  // B side: S = {b1} has N(S) = {a2}, 1 < 2 = min(2, cap).
  const auto res = expansion_check(g, Side::B, {2.0, 2});
  CHECK_FALSE(res.holds);
}

TEST_CASE("heuristic expansion mode never reports a false violator") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto g = random_graph(40, 40, 0.08, seed);
    ExpansionOptions opts;
    opts.exact_limit = 0;  // force the heuristic path
    opts.restarts = 60;
    opts.seed = seed;
    const auto res = expansion_check(g, Side::A, {2.0, 26}, opts);
    if (!res.holds) {
      std::vector<char> nbr(g.n_b, 0);
      int nbrs = 0;
      for (int a : res.violator) {
        for (int b : g.adj[a]) {
          if (!nbr[b]) {
            nbr[b] = 1;
            ++nbrs;
          }
        }
      }
      CHECK(nbrs == res.violator_neighbours);
      CHECK(nbrs < std::min(2.0 * res.violator.size(), 26.0));
    } else {
      CHECK_FALSE(res.exact);  // heuristic verdicts are flagged
    }
  }
}

TEST_CASE("find_shrinking_set finds small sets with tiny neighbourhoods") {
  // a0 and a1 both see only b0: S = {a0} already has |N(S)| = 1 <= 2.
  const auto g = from_edges(3, 3, {{0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}});
  const auto res = find_shrinking_set(g, Side::A, 2.0, 2);
  REQUIRE(res.set.has_value());
  CHECK(res.set->size() <= 2);

  // Degrees above 2*max_size rule everything out exactly.
  const auto dense = complete(6, 6);
  const auto none = find_shrinking_set(dense, Side::A, 2.0, 2);
  CHECK_FALSE(none.set.has_value());
  CHECK(none.exact_none);
}
