#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rainbow/core.hpp"
#include "rainbow/matching.hpp"
#include "rainbow/robust_pair.hpp"

namespace rainbow {

// Every constant the construction fixes asymptotically, made configurable
// with canonical defaults. "scaled" lifts thresholds that would fall below
// one vertex/edge at small n, preserving the relative structure of each
// stage; the reach threshold additionally gets the 4*ceil(log2 n) + 1 floor
// that the trace-back needs.
struct PipelineParams {
  double reserve_exp = 0.32;   // p = n^-reserve_exp
  double theta_exp = 0.66;     // theta = n^-theta_exp
  double min_deg_coef = 1e-3;
  double trim_coef = 1e-4;
  double epsilon = 0.1;
  DensityParams density{};
  double step_cap_multiplier = 2.0;
  double d_min_exp = 1.0 / 200.0;  // admissibility floor d > n^-1/200, logged only
  bool scaled = true;

  double reserve_p(int n) const;
  double theta(int n) const;
  int theta_floor(int n) const;  // 4 * ceil(log2 n) + 1
  int theta_threshold(int n, int a1_size) const;
  int step_cap(int n) const;
  double d_min(int n) const;
};

// "name value" lines, '#' comments; absent fields keep the defaults above.
PipelineParams parse_pipeline_params(std::string_view text);

struct ReservationStats {
  double p = 0.0;
  int reserved_colours = 0;
  double expected_reserved = 0.0;
  double band_low = 0.0, band_high = 0.0;  // p|A1| +- (p|A1|)^(2/3)
  int outside_b = 0, total_b = 0;          // B-vertices, reserved degree into A1
  int outside_a = 0, total_a = 0;          // A-vertices, reserved degree into B1
};

struct ReservationSplit {
  std::vector<char> reserved;  // per colour id
  std::vector<int> reserved_colours;
  ColouredBipartiteGraph gr;      // all edges of reserved colours
  ColouredBipartiteGraph g_star;  // non-reserved edges avoiding the core pair
  Subpair core;
  ReservationStats stats;
};

// Reserves each colour independently with probability p. Coins are keyed by
// (seed, least cell of the colour class), so the same seed reserves the same
// cell classes under any colour relabelling.
ReservationSplit reserve_colours(const ColouredBipartiteGraph& full, const Subpair& core,
                                 double p, std::uint64_t seed);

// Maximal rainbow matching: one pass over a seeded order of A, each vertex
// taking its lowest admissible edge.
RainbowMatching greedy_rainbow(const ColouredBipartiteGraph& graph, std::uint64_t seed);

enum class ReachTermination { Intersection, Stalled, StepCap };

struct ReachStep {
  std::vector<int> added_a, added_b;      // m2-edge ids entering R^A / R^B
  std::vector<int> colours_a, colours_b;  // colour batches joining C
};

// State of the two-phase reachability iteration. Colour timestamps realise
// the "earlier" relation: colours unused by m2 start at 0, batch additions
// get 1, 2, ... (ties inside a batch break by colour id).
struct ReachState {
  std::vector<int> r_a, r_b;  // m2-edge ids in insertion order
  std::vector<int> colour_ts;
  std::vector<char> in_ra, in_rb;     // per m2-edge id
  std::vector<char> first_set_ra;     // per m2-edge id: entered R^A before R^B
  std::vector<ReachStep> step_log;
  ReachTermination terminated_with = ReachTermination::Stalled;
  int intersection_edge = -1;  // m2-edge id
  int steps = 0;
  int threshold = 0;
  std::vector<int> a0, b0;  // the leftover sets the iteration ran against
};

ReachState build_reach(const ColouredBipartiteGraph& g_star, const RainbowMatching& m2,
                       const std::vector<int>& a0, const std::vector<int>& b0,
                       int threshold, int step_cap);

struct TraceBackResult {
  bool ok = false;
  RainbowMatching matching;  // size |m2| + 1, re-verified before returning
  int replacement_steps = 0;
  std::string error;
};

// Augmenting swap at the intersection edge plus the conflict-resolution walk:
// every replacement uses a strictly earlier colour and a fresh endpoint.
TraceBackResult trace_back(const ColouredBipartiteGraph& g_star, const RainbowMatching& m2,
                           const ReachState& reach);

struct AugmentStats {
  int greedy_size = 0;
  int augmentations = 0;
  int reach_calls = 0;
  int trace_failures = 0;
  int min_degree = 0;   // over vertices with at least one edge
  double benchmark = 0.0;  // delta - 2*delta^(2/3)
  bool benchmark_met = true;
};

// Greedy rainbow matching grown by reach + trace-back rounds until the
// leftover sets stall below the threshold or a trace fails. ref_size feeds
// the theta threshold (the pipeline passes |A1|; standalone callers default
// to the part size).
RainbowMatching augmenting_rainbow(const ColouredBipartiteGraph& graph, std::uint64_t seed,
                                   const PipelineParams& params, int ref_size = -1,
                                   AugmentStats* stats = nullptr);

struct FailureReport {
  std::string stage;
  std::string message;
  std::string inequality;
  double slack = 0.0;
};

struct StageRecord {
  std::string stage;
  bool ok = true;
  std::vector<std::pair<std::string, double>> metrics;
  std::string note;
};

std::string format_stage(const StageRecord& record);

struct TrimResult {
  bool ok = true;  // false on a min-degree shortfall (reported, not fatal)
  Subpair trimmed;
  double loss_threshold = 0.0;
  double required_min_degree = 0.0;
  int actual_min_degree = 0;
  int over_threshold_a = 0, over_threshold_b = 0;
  std::string note;
};

// Removes m2-coloured edges from the core, then trims each side to
// (1 - trim_coef*d)|A1| vertices, taking the heaviest losers first and
// padding with lowest-index vertices.
TrimResult trim_core(const ColouredBipartiteGraph& g1, const Subpair& core,
                     const std::vector<char>& m2_colours, double d,
                     const PipelineParams& params);

struct HardLeftovers {
  Subpair hard;  // (A'0, B'0)
  double bound = 0.0;  // p|A1|/4
  bool bound_ok = true;
};

// A'0: leftover A-vertices whose edges into B'1 are at least half
// m2-coloured (symmetrically B'0), checked against the p|A1|/4 bound.
HardLeftovers classify_hard_leftovers(const LatinArray& array, const Subpair& leftovers,
                                      const Subpair& trimmed,
                                      const std::vector<char>& m2_colours, double p,
                                      int a1_size);

struct M0Result {
  bool ok = false;
  RainbowMatching m0;
  std::optional<FailureReport> failure;
};

// Phase 1 matches the hard leftovers into the trimmed core over reserved
// colours; phase 2 matches the rest over any colour unused so far. Candidate
// partners are scanned in a seeded order, vertices in ascending order.
M0Result greedy_m0(const LatinArray& array, const std::vector<char>& reserved,
                   const Subpair& leftovers, const HardLeftovers& hard,
                   const Subpair& trimmed, const std::vector<char>& m2_colours,
                   std::uint64_t seed);

struct M3Result {
  bool ok = false;
  RainbowMatching m3;
  Subpair final_core;  // (A3, B3)
  int entry_min_degree = 0;
  double required_min_degree = 0.0;
  std::vector<int> hall_violator_set;  // on failure
};

// Perfect matching of G3 (the trimmed core minus M0's vertices and colours)
// via Hopcroft-Karp, or the Hall violator as a diagnostic.
M3Result finish_m3(const ColouredBipartiteGraph& g1, const Subpair& trimmed,
                   const std::vector<char>& m2_colours, const RainbowMatching& m0,
                   double d, int a1_size, const PipelineParams& params);

struct StageState {
  RainbowMatching m2, m0, m3;
  Subpair matched;    // (A2, B2)
  Subpair core;       // (A1, B1)
  Subpair trimmed;    // (A'1, B'1)
  Subpair leftovers;  // (A0, B0)
  Subpair hard;       // (A'0, B'0)
  Subpair final_core; // (A3, B3)
};

struct PipelineResult {
  bool success = false;
  RainbowMatching matching;
  std::optional<FailureReport> failure;
  std::vector<StageRecord> trace;
  StageState state;
};

// The full construction: one edge per colour, dense subpair, robust pair,
// colour reservation, M2 by augmentation, core trim, leftover classification,
// greedy M0, perfect M3, assembly. The result is verified before being
// declared a success; any stage failure names itself in the report.
PipelineResult solve_pipeline(const LatinArray& array, const PipelineParams& params,
                              std::uint64_t seed);

struct AutoResult {
  std::optional<RainbowMatching> matching;
  bool exact_none = false;  // the oracle proved no transversal exists
  std::string method;       // oracle | pipeline | augmenting | none
};

// Oracle for n <= 9, then the pipeline, then augmentation restarts on fresh
// one-edge-per-colour subgraphs. Every returned matching is verified.
AutoResult solve_auto(const LatinArray& array, std::uint64_t seed,
                      const PipelineParams& params = {});

}  // namespace rainbow
