#include "rainbow/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rainbow/rng.hpp"

namespace rainbow {

void BipartiteGraph::finish() {
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
}

BipartiteGraph BipartiteGraph::transposed() const {
  BipartiteGraph t(n_b, n_a);
  for (int a = 0; a < n_a; ++a) {
    for (int b : adj[a]) t.adj[b].push_back(a);
  }
  for (auto& row : t.adj) std::sort(row.begin(), row.end());
  return t;
}

BipartiteGraph strip_colours(const ColouredBipartiteGraph& graph) {
  BipartiteGraph g(graph.size_a(), graph.size_b());
  for (int a = 0; a < graph.size_a(); ++a) {
    auto span = graph.edges_at_a(a);
    g.adj[a].reserve(span.size());
    for (int id : span) g.adj[a].push_back(graph.edge(id).b);
  }
  return g;  // already sorted: edges_at_a is sorted by b
}

InducedPair induce(const ColouredBipartiteGraph& graph, const Subpair& pair,
                   const std::vector<char>* skip_colour) {
  InducedPair out;
  out.map_a = pair.a;
  out.map_b = pair.b;
  std::vector<int> local_b(graph.size_b(), -1);
  for (int i = 0; i < pair.size_b(); ++i) local_b[pair.b[i]] = i;
  out.graph = BipartiteGraph(pair.size_a(), pair.size_b());
  for (int i = 0; i < pair.size_a(); ++i) {
    for (int id : graph.edges_at_a(pair.a[i])) {
      const ColouredEdge& e = graph.edge(id);
      if (local_b[e.b] < 0) continue;
      if (skip_colour && (*skip_colour)[e.colour]) continue;
      out.graph.adj[i].push_back(local_b[e.b]);
    }
    std::sort(out.graph.adj[i].begin(), out.graph.adj[i].end());
  }
  return out;
}

Matching max_matching(const BipartiteGraph& graph) {
  const int na = graph.n_a, nb = graph.n_b;
  Matching m;
  m.match_a.assign(na, -1);
  m.match_b.assign(nb, -1);
  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<int> dist(na);
  std::vector<int> queue(na);

  auto bfs = [&]() {
    int head = 0, tail = 0;
    for (int a = 0; a < na; ++a) {
      if (m.match_a[a] < 0) {
        dist[a] = 0;
        queue[tail++] = a;
      } else {
        dist[a] = kInf;
      }
    }
    bool reachable_free_b = false;
    while (head < tail) {
      const int a = queue[head++];
      for (int b : graph.adj[a]) {
        const int a2 = m.match_b[b];
        if (a2 < 0) {
          reachable_free_b = true;
        } else if (dist[a2] == kInf) {
          dist[a2] = dist[a] + 1;
          queue[tail++] = a2;
        }
      }
    }
    return reachable_free_b;
  };

  auto dfs = [&](auto&& self, int a) -> bool {
    for (int b : graph.adj[a]) {
      const int a2 = m.match_b[b];
      if (a2 < 0 || (dist[a2] == dist[a] + 1 && self(self, a2))) {
        m.match_a[a] = b;
        m.match_b[b] = a;
        return true;
      }
    }
    dist[a] = kInf;
    return false;
  };

  while (bfs()) {
    for (int a = 0; a < na; ++a) {
      if (m.match_a[a] < 0 && dfs(dfs, a)) ++m.size;
    }
  }
  return m;
}

std::optional<std::vector<int>> hall_violator(const BipartiteGraph& graph, Side side) {
  const BipartiteGraph* g = &graph;
  BipartiteGraph t;
  if (side == Side::B) {
    t = graph.transposed();
    g = &t;
  }
  Matching m = max_matching(*g);
  int root = -1;
  for (int a = 0; a < g->n_a; ++a) {
    if (m.match_a[a] < 0) {
      root = a;
      break;
    }
  }
  if (root < 0) return std::nullopt;

  // Alternating reachability from the unmatched root: every reachable
  // B-vertex is matched (else the matching was not maximum) and its partner
  // joins S.
  std::vector<char> in_s(g->n_a, 0), seen_b(g->n_b, 0);
  std::vector<int> stack{root};
  in_s[root] = 1;
  while (!stack.empty()) {
    const int a = stack.back();
    stack.pop_back();
    for (int b : g->adj[a]) {
      if (seen_b[b]) continue;
      seen_b[b] = 1;
      const int a2 = m.match_b[b];
      if (a2 >= 0 && !in_s[a2]) {
        in_s[a2] = 1;
        stack.push_back(a2);
      }
    }
  }
  std::vector<int> s;
  for (int a = 0; a < g->n_a; ++a) {
    if (in_s[a]) s.push_back(a);
  }

  // Certify |N(S)| < |S| by direct recomputation.
  std::vector<char> nbr(g->n_b, 0);
  int nbr_count = 0;
  for (int a : s) {
    for (int b : g->adj[a]) {
      if (!nbr[b]) {
        nbr[b] = 1;
        ++nbr_count;
      }
    }
  }
  if (nbr_count >= static_cast<int>(s.size())) {
    throw std::logic_error("hall_violator certification failed");
  }
  return s;
}

namespace {

int neighbourhood_size(const BipartiteGraph& g, const std::vector<int>& s) {
  std::vector<char> nbr(g.n_b, 0);
  int count = 0;
  for (int a : s) {
    for (int b : g.adj[a]) {
      if (!nbr[b]) {
        nbr[b] = 1;
        ++count;
      }
    }
  }
  return count;
}

// Exhaustive DFS over subsets of size <= max_size in lexicographic order.
// fail(s, nbrs) tests the current subset; prune_all(nbrs) says no extension
// can fail. Returns the first (lexicographically least) failing subset.
template <typename FailFn, typename PruneFn>
std::optional<std::vector<int>> subset_search(const BipartiteGraph& g, int max_size,
                                              FailFn fail, PruneFn prune_all) {
  std::vector<int> cover(g.n_b, 0);
  std::vector<int> current;
  int nbrs = 0;

  auto rec = [&](auto&& self, int first) -> std::optional<std::vector<int>> {
    for (int v = first; v < g.n_a; ++v) {
      for (int b : g.adj[v]) {
        if (cover[b]++ == 0) ++nbrs;
      }
      current.push_back(v);
      if (fail(static_cast<int>(current.size()), nbrs)) return current;
      if (static_cast<int>(current.size()) < max_size && !prune_all(nbrs)) {
        auto hit = self(self, v + 1);
        if (hit) return hit;
      }
      current.pop_back();
      for (int b : g.adj[v]) {
        if (--cover[b] == 0) --nbrs;
      }
    }
    return std::nullopt;
  };
  return rec(rec, 0);
}

// Seeded steepest-descent over single-element flips minimizing
// |N(S)| - bound(|S|), over nonempty S with |S| <= max_size.
template <typename BoundFn>
std::optional<std::vector<int>> descent_search(const BipartiteGraph& g, int max_size,
                                               BoundFn bound, int restarts,
                                               std::uint64_t seed) {
  const int n = g.n_a;
  if (n == 0) return std::nullopt;
  max_size = std::min(max_size, n);
  Rng rng(seed);
  std::vector<int> cover(g.n_b, 0);
  std::vector<char> in_s(n, 0);

  for (int attempt = 0; attempt < restarts; ++attempt) {
    std::fill(cover.begin(), cover.end(), 0);
    std::fill(in_s.begin(), in_s.end(), 0);
    int size = 0, nbrs = 0;
    auto add = [&](int v) {
      in_s[v] = 1;
      ++size;
      for (int b : g.adj[v]) {
        if (cover[b]++ == 0) ++nbrs;
      }
    };
    auto remove = [&](int v) {
      in_s[v] = 0;
      --size;
      for (int b : g.adj[v]) {
        if (--cover[b] == 0) --nbrs;
      }
    };

    const int start = 1 + rng.below(max_size);
    for (int t = 0; t < start; ++t) {
      const int v = rng.below(n);
      if (!in_s[v]) add(v);
    }
    if (size == 0) add(rng.below(n));

    for (int step = 0; step < 4 * n + 16; ++step) {
      const int score = nbrs - bound(size);
      if (score < 0) break;
      int best_v = -1, best_delta = 0;
      for (int v = 0; v < n; ++v) {
        int delta;
        if (in_s[v]) {
          if (size == 1) continue;
          int lost = 0;
          for (int b : g.adj[v]) {
            if (cover[b] == 1) ++lost;
          }
          delta = (nbrs - lost - bound(size - 1)) - score;
        } else {
          if (size == max_size) continue;
          int gained = 0;
          for (int b : g.adj[v]) {
            if (cover[b] == 0) ++gained;
          }
          delta = (nbrs + gained - bound(size + 1)) - score;
        }
        if (delta < best_delta || (delta == best_delta && delta < 0 && v < best_v)) {
          best_delta = delta;
          best_v = v;
        }
      }
      if (best_v < 0 || best_delta >= 0) break;
      if (in_s[best_v]) {
        remove(best_v);
      } else {
        add(best_v);
      }
    }

    if (size > 0 && size <= max_size && nbrs - bound(size) < 0) {
      std::vector<int> s;
      for (int v = 0; v < n; ++v) {
        if (in_s[v]) s.push_back(v);
      }
      return s;
    }
  }
  return std::nullopt;
}

int min_degree(const BipartiteGraph& g) {
  int d = std::numeric_limits<int>::max();
  for (const auto& row : g.adj) d = std::min(d, static_cast<int>(row.size()));
  return g.n_a == 0 ? 0 : d;
}

}  // namespace

ExpansionResult expansion_check(const BipartiteGraph& graph, Side side,
                                const ExpansionSpec& spec, const ExpansionOptions& opts) {
  if (spec.factor <= 1.0 || spec.cap <= 0) {
    throw std::invalid_argument("expansion spec requires factor > 1 and cap > 0");
  }
  const BipartiteGraph* g = &graph;
  BipartiteGraph t;
  if (side == Side::B) {
    t = graph.transposed();
    g = &t;
  }
  ExpansionResult result;
  if (g->n_a == 0) return result;

  // |N(S)| >= min degree for every nonempty S, so min degree >= cap settles it.
  if (min_degree(*g) >= spec.cap) return result;

  // Any violator contains one of size <= ceil(cap/factor): drop to that size,
  // the requirement becomes the full cap while N only shrinks.
  int search_size = static_cast<int>(std::ceil(spec.cap / spec.factor));
  search_size = std::max(search_size, 1);
  if (opts.max_set_size >= 0) search_size = std::min(search_size, opts.max_set_size);
  auto bound = [&](int s) {
    return std::min(static_cast<int>(std::ceil(spec.factor * s - 1e-9)), spec.cap);
  };

  if (g->n_a <= opts.exact_limit) {
    auto hit = subset_search(
        *g, search_size, [&](int s, int nbrs) { return nbrs < bound(s); },
        [&](int nbrs) { return nbrs >= spec.cap; });
    if (hit) {
      result.holds = false;
      result.violator = *hit;
      result.violator_neighbours = neighbourhood_size(*g, *hit);
      if (result.violator_neighbours >= bound(static_cast<int>(hit->size()))) {
        throw std::logic_error("expansion violator certification failed");
      }
    }
    return result;
  }

  auto hit = descent_search(
      *g, search_size, bound, opts.restarts, mix_seed(opts.seed, 0xe19a));
  if (hit) {
    const int nbrs = neighbourhood_size(*g, *hit);
    if (nbrs < bound(static_cast<int>(hit->size()))) {
      result.holds = false;
      result.exact = true;  // a certified violator is exact evidence
      result.violator = *hit;
      result.violator_neighbours = nbrs;
      return result;
    }
  }
  result.holds = true;
  result.exact = false;
  return result;
}

ShrinkingSetResult find_shrinking_set(const BipartiteGraph& graph, Side side, double ratio,
                                      int max_size, const ExpansionOptions& opts) {
  const BipartiteGraph* g = &graph;
  BipartiteGraph t;
  if (side == Side::B) {
    t = graph.transposed();
    g = &t;
  }
  ShrinkingSetResult result;
  if (g->n_a == 0 || max_size <= 0) return result;
  max_size = std::min(max_size, g->n_a);

  // |N(S)| >= min degree, so min degree > ratio*max_size rules everything out.
  if (min_degree(*g) > ratio * max_size) return result;

  auto fail = [&](int s, int nbrs) { return nbrs <= ratio * s + 1e-9; };

  if (g->n_a <= opts.exact_limit) {
    auto hit = subset_search(*g, max_size, fail,
                             [&](int nbrs) { return nbrs > ratio * max_size + 1e-9; });
    if (hit) result.set = *hit;
    return result;
  }

  auto bound = [&](int s) { return static_cast<int>(ratio * s) + 1; };
  auto hit = descent_search(*g, max_size, bound, opts.restarts, mix_seed(opts.seed, 0x5e75));
  if (hit && fail(static_cast<int>(hit->size()), neighbourhood_size(*g, *hit))) {
    result.set = *hit;
    return result;
  }
  result.exact_none = false;
  return result;
}

}  // namespace rainbow
