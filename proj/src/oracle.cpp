#include "rainbow/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace rainbow {

namespace {

void require_valid(const LatinArray& array) {
  ValidationReport report = validate_latin(array);
  if (!report.ok()) throw std::invalid_argument("oracle requires a valid Latin array");
}

// Shared backtracking core: counts transversals, optionally stopping at the
// first one and recording it.
std::uint64_t backtrack(const LatinArray& array, bool stop_at_first,
                        std::vector<int>* first) {
  const int n = array.n;
  std::vector<char> col_used(n, 0), colour_used(array.k, 0);
  std::vector<int> choice(n, -1);
  std::uint64_t count = 0;

  // Recursion over rows, columns tried in ascending order.
  auto rec = [&](auto&& self, int row) -> bool {
    if (row == n) {
      ++count;
      if (first && first->empty()) *first = choice;
      return stop_at_first;
    }
    for (int col = 0; col < n; ++col) {
      if (col_used[col]) continue;
      const int colour = array.at(row, col);
      if (colour_used[colour]) continue;
      col_used[col] = colour_used[colour] = 1;
      choice[row] = col;
      const bool done = self(self, row + 1);
      col_used[col] = colour_used[colour] = 0;
      choice[row] = -1;
      if (done) return true;
    }
    return false;
  };
  rec(rec, 0);
  return count;
}

}  // namespace

std::uint64_t count_transversals(const LatinArray& array) {
  require_valid(array);
  return backtrack(array, false, nullptr);
}

std::uint64_t count_transversals_exhaustive(const LatinArray& array) {
  require_valid(array);
  const int n = array.n;
  if (n > 8) throw std::invalid_argument("exhaustive oracle supports n <= 8");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<char> colour_used(array.k, 0);
  std::uint64_t count = 0;
  do {
    bool ok = true;
    std::fill(colour_used.begin(), colour_used.end(), 0);
    for (int row = 0; row < n; ++row) {
      const int colour = array.at(row, perm[row]);
      if (colour_used[colour]) {
        ok = false;
        break;
      }
      colour_used[colour] = 1;
    }
    if (ok) ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

std::optional<RainbowMatching> find_transversal_exact(const LatinArray& array) {
  require_valid(array);
  std::vector<int> first;
  backtrack(array, true, &first);
  if (first.empty()) return std::nullopt;
  RainbowMatching m;
  for (int row = 0; row < array.n; ++row) {
    m.edges.push_back({row, first[row], array.at(row, first[row])});
  }
  return m;
}

RainbowMatching max_rainbow_matching_exact(const ColouredBipartiteGraph& graph,
                                           int max_size_a) {
  if (graph.size_a() > max_size_a) {
    throw std::invalid_argument("instance too large for the exact matching oracle");
  }
  std::vector<char> b_used(graph.size_b(), 0), colour_used(graph.colour_bound(), 0);
  std::vector<ColouredEdge> current, best;

  auto rec = [&](auto&& self, int a) -> void {
    if (current.size() > best.size()) best = current;
    if (a == graph.size_a()) return;
    // Prune: even matching every remaining row cannot beat the best.
    if (current.size() + static_cast<std::size_t>(graph.size_a() - a) <= best.size()) return;
    for (int id : graph.edges_at_a(a)) {
      const ColouredEdge& e = graph.edge(id);
      if (b_used[e.b] || colour_used[e.colour]) continue;
      b_used[e.b] = colour_used[e.colour] = 1;
      current.push_back(e);
      self(self, a + 1);
      current.pop_back();
      b_used[e.b] = colour_used[e.colour] = 0;
    }
    self(self, a + 1);  // leave row a unmatched
  };
  rec(rec, 0);
  return {best};
}

}  // namespace rainbow
