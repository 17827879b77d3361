#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rainbow {

// An order-n square grid of colour ids in [0, k). Stored row-major. The
// struct itself does not enforce the Latin property; validate_latin reports
// violations and the graph builders reject invalid arrays.
struct LatinArray {
  int n = 0;
  int k = 0;
  std::vector<int> grid;  // n*n entries, row-major

  int at(int row, int col) const { return grid[static_cast<std::size_t>(row) * n + col]; }
  int& at(int row, int col) { return grid[static_cast<std::size_t>(row) * n + col]; }
};

struct Violation {
  int row = -1;
  int col = -1;
  int colour = -1;
  std::string reason;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Checks grid shape, colour range, row/column properness and that every
// colour id in [0, k) is used at least once.
ValidationReport validate_latin(const LatinArray& array);

struct ColouredEdge {
  int a = 0;
  int b = 0;
  int colour = 0;

  friend bool operator==(const ColouredEdge&, const ColouredEdge&) = default;
};

// Properly edge-coloured bipartite graph with parts A (rows) and B (columns).
// Immutable after construction; exposes adjacency by A-vertex, by B-vertex
// and by colour class. The constructor rejects parallel edges and improper
// colourings.
class ColouredBipartiteGraph {
 public:
  ColouredBipartiteGraph() = default;
  ColouredBipartiteGraph(int size_a, int size_b, int colour_bound,
                         std::vector<ColouredEdge> edges);

  int size_a() const { return size_a_; }
  int size_b() const { return size_b_; }
  int colour_bound() const { return colour_bound_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  const ColouredEdge& edge(int id) const { return edges_[id]; }
  const std::vector<ColouredEdge>& edges() const { return edges_; }

  // Edge ids incident to a vertex, sorted by the opposite endpoint.
  std::span<const int> edges_at_a(int a) const;
  std::span<const int> edges_at_b(int b) const;
  // Edge ids of one colour class, sorted by (a, b).
  std::span<const int> colour_class(int colour) const;

  int degree_a(int a) const { return a_off_[a + 1] - a_off_[a]; }
  int degree_b(int b) const { return b_off_[b + 1] - b_off_[b]; }

  // Number of colours with at least one edge.
  int distinct_colours() const { return distinct_colours_; }

  std::optional<int> find_edge(int a, int b) const;

 private:
  int size_a_ = 0, size_b_ = 0, colour_bound_ = 0, distinct_colours_ = 0;
  std::vector<ColouredEdge> edges_;
  std::vector<int> a_off_, a_idx_;
  std::vector<int> b_off_, b_idx_;
  std::vector<int> c_off_, c_idx_;
};

// Complete bipartite graph of the array: edge (r, c) coloured grid[r][c].
// Throws std::invalid_argument when the array fails validation.
ColouredBipartiteGraph to_graph(const LatinArray& array);

// Subgraph keeping exactly one edge per colour present in the input. The
// representative of each class is picked by a per-class hash of (seed,
// lexicographically least cell), so equal seeds give identical output and the
// choice is stable under colour relabelling.
ColouredBipartiteGraph one_edge_per_colour(const ColouredBipartiteGraph& graph,
                                           std::uint64_t seed);

struct RainbowMatching {
  std::vector<ColouredEdge> edges;

  int size() const { return static_cast<int>(edges.size()); }
};

// Vertex-disjoint, colour-disjoint and contained in the graph.
bool is_rainbow_matching(const ColouredBipartiteGraph& graph, const RainbowMatching& m);
// is_rainbow_matching plus saturation of both parts.
bool verify_rainbow_perfect(const ColouredBipartiteGraph& graph, const RainbowMatching& m);

// Role-tagged pair of vertex subsets; entries sorted ascending, no repeats.
struct Subpair {
  std::vector<int> a;
  std::vector<int> b;

  int size_a() const { return static_cast<int>(a.size()); }
  int size_b() const { return static_cast<int>(b.size()); }
};

// Sorts, deduplicates and range-checks.
Subpair make_subpair(std::vector<int> a, std::vector<int> b, int size_a, int size_b);

// Text format: first line "n k", then n lines of n colour ids.
// Throws std::invalid_argument on malformed header, ragged rows or
// out-of-range colour ids.
LatinArray parse_latin(std::string_view text);
std::string serialize_latin(const LatinArray& array);

// One JSON line of {row, col, colour} records followed by the verdict line
// "RAINBOW-PERFECT: yes|no".
std::string serialize_matching(const RainbowMatching& m, bool rainbow_perfect);
RainbowMatching parse_matching(std::string_view text);

}  // namespace rainbow
