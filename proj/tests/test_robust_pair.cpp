#include <cmath>
#include <numeric>
#include <stdexcept>

#include "doctest.h"
#include "rainbow/generators.hpp"
#include "rainbow/robust_pair.hpp"
#include "rainbow/rng.hpp"

using namespace rainbow;

namespace {

Subpair full_scope(const ColouredBipartiteGraph& g) {
  std::vector<int> a(g.size_a()), b(g.size_b());
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), 0);
  return {a, b};
}

// Properly coloured bipartite graph with every cell carrying its own colour,
// thinned by a seeded coin.
ColouredBipartiteGraph random_coloured(int n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ColouredEdge> edges;
  int colour = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (rng.unit() < p) edges.push_back({a, b, colour++});
    }
  }
  return {n, n, std::max(colour, 1), std::move(edges)};
}

}  // namespace

TEST_CASE("density on reference instances") {
  const auto k22 = to_graph(cyclic_latin(2));
  const Rational full = density(k22, full_scope(k22));
  CHECK(full.num == 1);
  CHECK(full.den == 1);

  const ColouredBipartiteGraph empty(3, 3, 1, {});
  const Rational zero = density(empty, full_scope(empty));
  CHECK(zero.num == 0);

  const auto sub = one_edge_per_colour(to_graph(cyclic_latin(3)), 5);
  const Rational third = density(sub, full_scope(sub));
  CHECK(third.num == 1);
  CHECK(third.den == 3);

  CHECK_THROWS_AS(density(k22, Subpair{{}, {0}}), std::invalid_argument);
}

TEST_CASE("density is invariant under vertex relabelling") {
  const auto g = random_coloured(8, 0.4, 3);
  const Rational base = density(g, full_scope(g));
  // Relabel by reversing indices.
  std::vector<ColouredEdge> edges;
  for (const auto& e : g.edges()) edges.push_back({7 - e.a, 7 - e.b, e.colour});
  const ColouredBipartiteGraph rev(8, 8, g.colour_bound(), std::move(edges));
  const Rational relabeled = density(rev, full_scope(rev));
  CHECK(base.num == relabeled.num);
  CHECK(base.den == relabeled.den);
}

TEST_CASE("is_dense on complete and empty graphs") {
  const auto complete = to_graph(split_colours(cyclic_latin(4), 16, 1));
  CHECK(is_dense(complete, 0.25, 1.0).dense);

  const ColouredBipartiteGraph empty(8, 8, 1, {});
  const auto res = is_dense(empty, 0.5, 0.1);
  REQUIRE_FALSE(res.dense);
  REQUIRE(res.violator.has_value());
  CHECK(res.violator_density == 0.0);
  CHECK(res.violator->size_a() >= 4);
}

TEST_CASE("exact is_dense finds planted sparse corners") {
  // 8x8 complete except a 3x3 empty corner.
  std::vector<ColouredEdge> edges;
  int colour = 0;
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      if (a < 3 && b < 3) continue;
      edges.push_back({a, b, colour++});
    }
  }
  const ColouredBipartiteGraph g(8, 8, colour, std::move(edges));
  const auto res = is_dense(g, 3.0 / 8.0, 0.5);
  REQUIRE_FALSE(res.dense);
  CHECK(res.exact);
  REQUIRE(res.violator.has_value());
  CHECK(res.violator->a == std::vector<int>{0, 1, 2});
  CHECK(res.violator->b == std::vector<int>{0, 1, 2});
  CHECK(res.violator_density == 0.0);
}

TEST_CASE("sampled is_dense flags its verdicts and verifies violators") {
  const auto g = random_coloured(40, 0.5, 9);
  const auto res = is_dense(g, 0.1, 0.05);
  if (res.dense) {
    CHECK_FALSE(res.exact);  // scope too large for enumeration
  } else {
    REQUIRE(res.violator.has_value());
    const Rational d = density(g, *res.violator);
    CHECK(d.value() < 0.05);
  }
}

TEST_CASE("size exponent with the default constants stays below 60") {
  DensityParams params;
  params.validate();
  CHECK(params.size_exponent() < 60.0);
  CHECK(params.size_exponent() > 58.0);
}

TEST_CASE("dense_subpair returns the full pair when already dense") {
  const auto complete = to_graph(split_colours(cyclic_latin(6), 36, 2));
  const auto res = dense_subpair(complete, DensityParams{}, 1.0);
  REQUIRE(res.ok);
  CHECK(res.iterations == 0);
  CHECK(res.pair.size_a() == 6);
  CHECK(res.pair_density == 1.0);
}

TEST_CASE("dense_subpair iteration count respects the density bound") {
  DensityParams params;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto g = random_coloured(12, 0.35, seed);
    const double d =
        static_cast<double>(g.edge_count()) / (g.size_a() * g.size_b());
    if (d <= 0.0) continue;
    const auto res = dense_subpair(g, params, d);
    const int cap = static_cast<int>(
        std::ceil(std::log(1.0 / d) / std::log(1.0 + params.c * params.epsilon)));
    if (res.ok) {
      CHECK(res.iterations <= cap + 8);
      CHECK(res.pair.size_a() == res.pair.size_b());
      // The returned pair really is dense at the certified level.
      const double final_density = density(g, res.pair).value();
      const auto check = is_dense(g, res.pair, params.epsilon, params.c_prime * final_density);
      CHECK(check.dense);
    }
  }
}

TEST_CASE("dense_subpair on a mid-size one-edge-per-colour instance") {
  const LatinArray array = split_colours(random_latin(64, 5, 4096), 2048, 6);
  const auto g = one_edge_per_colour(to_graph(array), 17);
  const double d = 2048.0 / (64.0 * 64.0);
  const auto res = dense_subpair(g, DensityParams{}, d);
  REQUIRE(res.ok);
  CHECK(res.pair.size_a() == res.pair.size_b());
  // Output passes the sampled checker at (epsilon, d_cur / 50).
  const auto check = is_dense(g, res.pair, 0.1, res.pair_density / 50.0);
  CHECK(check.dense);
}

TEST_CASE("prune_to_robust leaves complete pairs untouched") {
  const auto complete = to_graph(split_colours(cyclic_latin(8), 64, 3));
  const auto res = prune_to_robust(complete, full_scope(complete), 1.0, 1e-3, DensityParams{});
  REQUIRE(res.ok);
  CHECK(res.robust.pair.size_a() == 8);
  CHECK(res.robust.provenance.empty());
  CHECK(res.robust.min_degree == 8);
}

TEST_CASE("prune_to_robust removes an isolated vertex as type (i)") {
  // Complete 6x6 with all edges at a5 removed: a5 is isolated.
  std::vector<ColouredEdge> edges;
  int colour = 0;
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 6; ++b) edges.push_back({a, b, colour++});
  }
  const ColouredBipartiteGraph g(6, 6, colour, std::move(edges));
  Subpair scope;
  scope.a = {0, 1, 2, 3, 4, 5};
  scope.b = {0, 1, 2, 3, 4, 5};
  const auto res = prune_to_robust(g, scope, 0.8, 1e-3, DensityParams{});
  REQUIRE(res.ok);
  CHECK(res.robust.pair.size_a() == 5);
  REQUIRE_FALSE(res.robust.provenance.empty());
  const DeletionEvent& first = res.robust.provenance.front();
  CHECK(first.type == 'i');
  CHECK(first.removed == std::vector<int>{5});
  CHECK(first.rebalance.size() == 1);
  CHECK(first.rebalance.front() == 0);  // lowest-index opposite vertex
}

TEST_CASE("prune_to_robust outputs certify expansion and min degree post hoc") {
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const int n = 14 + static_cast<int>(seed % 5);
    const int k = static_cast<int>(0.55 * n * n);
    const LatinArray array = split_colours(random_latin(n, seed, 4 * n * n), k, seed + 1);
    const auto g = one_edge_per_colour(to_graph(array), seed + 2);
    const double d = static_cast<double>(k) / (n * n);
    const auto dense = dense_subpair(g, DensityParams{}, d);
    if (!dense.ok) continue;
    const auto res = prune_to_robust(g, dense.pair, d, 1e-3, DensityParams{});
    if (!res.ok) continue;
    ++successes;
    REQUIRE(res.robust.pair.size_a() <= 20);
    const auto check = verify_robust_pair(g, res.robust);
    CHECK(check.min_degree_ok);
    CHECK(check.expansion_a.holds);
    CHECK(check.expansion_b.holds);
    CHECK(check.expansion_a.exact);
    CHECK(check.expansion_b.exact);
    // Deletions strictly shrink and the run terminates within budget.
    CHECK(res.deleted_per_side <= static_cast<int>(2 * 0.1 * dense.pair.size_a()) + 1);
  }
  CHECK(successes >= 8);
}

TEST_CASE("prune_to_robust keeps parts balanced") {
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    const auto g = random_coloured(15, 0.3, seed);
    const auto res = prune_to_robust(g, full_scope(g), 0.3, 1e-3, DensityParams{});
    CHECK(res.robust.pair.size_a() == res.robust.pair.size_b());
  }
}

TEST_CASE("density params validation rejects bad constants") {
  DensityParams bad;
  bad.c = 0.3;
  bad.c_prime = 0.5;  // 4c + c' = 1.7 > 1
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
