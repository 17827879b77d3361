#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rainbow/core.hpp"

namespace rainbow {

// Uncoloured bipartite graph; adjacency lists must be sorted ascending (the
// builders below guarantee it) so that search order is deterministic.
struct BipartiteGraph {
  int n_a = 0;
  int n_b = 0;
  std::vector<std::vector<int>> adj;  // indexed by A-vertex

  BipartiteGraph() = default;
  BipartiteGraph(int na, int nb) : n_a(na), n_b(nb), adj(na) {}
  void add_edge(int a, int b) { adj[a].push_back(b); }
  void finish();  // sort + dedup adjacency
  BipartiteGraph transposed() const;
};

BipartiteGraph strip_colours(const ColouredBipartiteGraph& graph);

// Induced subgraph on a subpair, with local indices and the maps back to the
// host graph. Edges whose colour is flagged in skip_colour are dropped.
struct InducedPair {
  BipartiteGraph graph;
  std::vector<int> map_a, map_b;  // local -> global
};
InducedPair induce(const ColouredBipartiteGraph& graph, const Subpair& pair,
                   const std::vector<char>* skip_colour = nullptr);

struct Matching {
  std::vector<int> match_a;  // A -> B or -1
  std::vector<int> match_b;  // B -> A or -1
  int size = 0;
};

// Maximum-cardinality matching, Hopcroft-Karp (phase-batched shortest
// augmenting paths). Ties broken by lowest index throughout.
Matching max_matching(const BipartiteGraph& graph);

enum class Side { A, B };

// nullopt iff a matching saturating the side exists; otherwise a set S on
// that side with |N(S)| < |S|, built from alternating reachability out of the
// lowest-index unmatched vertex and re-certified before returning.
std::optional<std::vector<int>> hall_violator(const BipartiteGraph& graph, Side side);

struct ExpansionSpec {
  double factor = 2.0;
  int cap = 1;  // absolute ceiling, canonically floor(2|A1|/3)
};

struct ExpansionOptions {
  int exact_limit = 24;      // exact subset search up to this part size
  int restarts = 200;        // heuristic descent restarts
  std::uint64_t seed = 0;
  int max_set_size = -1;     // restrict |S| (used by the deletion algorithm); -1: no cap
};

struct ExpansionResult {
  bool holds = true;
  bool exact = true;  // false when only the heuristic search vouches for "holds"
  std::vector<int> violator;      // side-local indices, certified on return
  int violator_neighbours = 0;
};

// Checks |N(S)| >= min(factor*|S|, cap) for every nonempty S on the side.
// Exact when the part is small (subset DFS limited to |S| <= ceil(cap/factor)
// with the neighbourhood-monotone prune) or when min degree >= cap; otherwise
// seeded steepest-descent search for a violator.
ExpansionResult expansion_check(const BipartiteGraph& graph, Side side,
                                const ExpansionSpec& spec,
                                const ExpansionOptions& opts = {});

// Set S on the side with |S| <= max_size and |N(S)| <= ratio*|S|, or nullopt.
// Same exact/heuristic split as expansion_check; "exact_none" reports whether
// a nullopt is exhaustive.
struct ShrinkingSetResult {
  std::optional<std::vector<int>> set;
  bool exact_none = true;
};
ShrinkingSetResult find_shrinking_set(const BipartiteGraph& graph, Side side, double ratio,
                                      int max_size, const ExpansionOptions& opts = {});

}  // namespace rainbow
