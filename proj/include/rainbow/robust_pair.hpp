#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rainbow/core.hpp"
#include "rainbow/matching.hpp"

namespace rainbow {

struct DensityParams {
  double epsilon = 0.1;
  double c = 0.24;
  double c_prime = 1.0 / 50.0;

  // 2 / log2(1 + c*epsilon); below 60 with the defaults.
  double size_exponent() const;
  void validate() const;  // throws std::invalid_argument on bad constants
};

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / den; }
};

// Edge density e(A', B') / (|A'| |B'|) as an exact reduced rational.
// Throws std::invalid_argument when a part is empty.
Rational density(const ColouredBipartiteGraph& graph, const Subpair& pair);

struct DenseCheckOptions {
  int exact_min_side = 16;   // exact enumeration when the smaller part fits
  int exact_max_other = 64;  // ... and the larger part fits this
  int samples = 48;
  std::uint64_t seed = 0;
};

struct DenseCheckResult {
  bool dense = true;
  bool exact = true;
  std::optional<Subpair> violator;  // global indices; re-verified on return
  double violator_density = 0.0;
};

// (epsilon, delta)-density of graph[scope]: every subpair with parts of at
// least an epsilon fraction of the scope must have density >= delta. Exact by
// subset enumeration at small scale, otherwise greedy sparsification plus
// seeded sampling (violators always verified, "dense" flagged heuristic).
DenseCheckResult is_dense(const ColouredBipartiteGraph& graph, const Subpair& scope,
                          double epsilon, double delta, const DenseCheckOptions& opts = {});
DenseCheckResult is_dense(const ColouredBipartiteGraph& graph, double epsilon, double delta,
                          const DenseCheckOptions& opts = {});

struct DenseSubpairResult {
  bool ok = false;
  Subpair pair;             // equal-sized parts
  double pair_density = 0.0;  // at termination
  int iterations = 0;
  int growth_shortfalls = 0;  // moves below the (1 + c*epsilon) factor
  bool exact = true;          // every density verdict along the way was exact
  double size_floor = 0.0;    // d^{size_exponent} * n / 2
  std::string error;
};

// Density-increment iteration: while the current pair is not
// (epsilon, c_prime * current_density)-dense, move to the densest
// witness-induced candidate subpair and trim to equal part sizes keeping
// highest-degree vertices. Fails (reported) when no candidate makes progress,
// the iteration cap trips, or the final size is below the guaranteed floor.
DenseSubpairResult dense_subpair(const ColouredBipartiteGraph& graph,
                                 const DensityParams& params, double d,
                                 const DenseCheckOptions& opts = {});

struct DeletionEvent {
  int step = 0;
  char type = 'i';  // 'i' degree deletion, 's' shrinking set
  Side side = Side::A;
  std::vector<int> removed;    // global indices
  std::vector<int> rebalance;  // opposite-side removals keeping parts equal
};

struct RobustPair {
  Subpair pair;
  int min_degree = 0;             // recomputed on the returned pair
  double degree_threshold = 0.0;  // the type-(i) cutoff used
  ExpansionSpec expansion;        // factor 2, cap floor(2|A1|/3)
  std::vector<DeletionEvent> provenance;
};

struct PruneOptions {
  bool scaled = true;           // lift sub-1 thresholds to one vertex/edge
  int exact_limit = 24;
  int restarts = 200;
  std::uint64_t seed = 0;
};

struct RobustPairResult {
  bool ok = false;
  RobustPair robust;
  int deleted_per_side = 0;
  bool type2_exact = true;  // all shrinking-set "none" verdicts were exhaustive
  std::string error;
};

// The deletion algorithm behind the robust pair: repeatedly remove low-degree
// vertices (type i) and small sets with |N(S)| <= 2|S| (type ii), rebalancing
// the opposite side with lowest-index vertices, until no deletion applies or
// 2*epsilon*|A'| vertices per side are gone (failure).
RobustPairResult prune_to_robust(const ColouredBipartiteGraph& graph, const Subpair& pair,
                                 double d, double min_deg_coef, const DensityParams& params,
                                 const PruneOptions& opts = {});

struct RobustPairCheck {
  bool min_degree_ok = false;
  int min_degree = 0;
  ExpansionResult expansion_a, expansion_b;
  bool holds() const {
    return min_degree_ok && expansion_a.holds && expansion_b.holds;
  }
};

// Post-hoc certification: recomputes the in-pair minimum degree and runs
// expansion_check on both sides against the stored spec.
RobustPairCheck verify_robust_pair(const ColouredBipartiteGraph& graph,
                                   const RobustPair& robust,
                                   const ExpansionOptions& opts = {});

}  // namespace rainbow
