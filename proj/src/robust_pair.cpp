#include "rainbow/robust_pair.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rainbow/rng.hpp"

namespace rainbow {

double DensityParams::size_exponent() const { return 2.0 / std::log2(1.0 + c * epsilon); }

void DensityParams::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must be in (0,1)");
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("c must be in (0,1)");
  if (!(c_prime > 0.0 && c_prime < 1.0)) throw std::invalid_argument("c' must be in (0,1)");
  if (4.0 * c + c_prime > 1.0 + 1e-12) throw std::invalid_argument("need 4c + c' <= 1");
}

namespace {

std::int64_t count_edges(const ColouredBipartiteGraph& graph, const std::vector<int>& a,
                         const std::vector<char>& b_mask) {
  std::int64_t edges = 0;
  for (int v : a) {
    for (int id : graph.edges_at_a(v)) {
      if (b_mask[graph.edge(id).b]) ++edges;
    }
  }
  return edges;
}

std::vector<char> mask_of(const std::vector<int>& vs, int size) {
  std::vector<char> mask(size, 0);
  for (int v : vs) mask[v] = 1;
  return mask;
}

int ceil_fraction(double eps, int size) {
  return std::max(1, static_cast<int>(std::ceil(eps * size - 1e-9)));
}

}  // namespace

Rational density(const ColouredBipartiteGraph& graph, const Subpair& pair) {
  if (pair.a.empty() || pair.b.empty()) {
    throw std::invalid_argument("density of an empty part is undefined");
  }
  const std::vector<char> b_mask = mask_of(pair.b, graph.size_b());
  const std::int64_t edges = count_edges(graph, pair.a, b_mask);
  const std::int64_t cells =
      static_cast<std::int64_t>(pair.a.size()) * static_cast<std::int64_t>(pair.b.size());
  const std::int64_t g = std::gcd(edges == 0 ? cells : edges, cells);
  return {edges / g, cells / g};
}

namespace {

// Exact (epsilon, delta)-density check by enumerating subsets of the smaller
// side; for each subset the minimising opposite part is a prefix of columns
// sorted by in-subset degree. Tracks the global minimiser so callers get the
// best witness.
DenseCheckResult dense_exact(const ColouredBipartiteGraph& graph, const Subpair& scope,
                             double epsilon, double delta, bool a_is_small) {
  const std::vector<int>& small = a_is_small ? scope.a : scope.b;
  const std::vector<int>& large = a_is_small ? scope.b : scope.a;
  const int ns = static_cast<int>(small.size());
  const int nl = static_cast<int>(large.size());
  const int min_small = ceil_fraction(epsilon, ns);
  const int min_large = ceil_fraction(epsilon, nl);

  // col_bits[j]: bitmask over the small side adjacent to large[j].
  std::vector<std::uint32_t> col_bits(nl, 0);
  {
    std::vector<int> small_pos(a_is_small ? graph.size_a() : graph.size_b(), -1);
    for (int i = 0; i < ns; ++i) small_pos[small[i]] = i;
    for (int j = 0; j < nl; ++j) {
      const int v = large[j];
      auto span = a_is_small ? graph.edges_at_b(v) : graph.edges_at_a(v);
      for (int id : span) {
        const ColouredEdge& e = graph.edge(id);
        const int other = a_is_small ? e.a : e.b;
        if (small_pos[other] >= 0) col_bits[j] |= (1u << small_pos[other]);
      }
    }
  }

  double best_ratio = 2.0;
  std::uint32_t best_mask = 0;
  std::vector<int> best_cols;
  std::vector<int> counts(nl), order(nl);
  for (std::uint32_t mask = 1; mask < (1u << ns); ++mask) {
    const int rows = std::popcount(mask);
    if (rows < min_small) continue;
    for (int j = 0; j < nl; ++j) counts[j] = std::popcount(col_bits[j] & mask);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return counts[x] < counts[y]; });
    std::int64_t prefix = 0;
    for (int m = 1; m <= nl; ++m) {
      prefix += counts[order[m - 1]];
      if (m < min_large) continue;
      const double ratio =
          static_cast<double>(prefix) / (static_cast<double>(rows) * m);
      if (ratio < best_ratio) {
        best_ratio = ratio;
        best_mask = mask;
        best_cols.assign(order.begin(), order.begin() + m);
      }
    }
  }

  DenseCheckResult result;
  result.exact = true;
  if (best_ratio >= delta - 1e-12) return result;

  std::vector<int> sub_small, sub_large;
  for (int i = 0; i < ns; ++i) {
    if (best_mask & (1u << i)) sub_small.push_back(small[i]);
  }
  for (int j : best_cols) sub_large.push_back(large[j]);
  std::sort(sub_large.begin(), sub_large.end());
  result.dense = false;
  result.violator_density = best_ratio;
  result.violator = a_is_small ? Subpair{sub_small, sub_large} : Subpair{sub_large, sub_small};
  return result;
}

struct PairView {
  std::vector<int> a, b;
  std::vector<char> a_mask, b_mask;
  std::int64_t edges = 0;

  double dens() const {
    const std::int64_t cells = static_cast<std::int64_t>(a.size()) * b.size();
    return cells == 0 ? 0.0 : static_cast<double>(edges) / cells;
  }
};

PairView make_view(const ColouredBipartiteGraph& graph, const Subpair& pair) {
  PairView view;
  view.a = pair.a;
  view.b = pair.b;
  view.a_mask = mask_of(pair.a, graph.size_a());
  view.b_mask = mask_of(pair.b, graph.size_b());
  view.edges = count_edges(graph, pair.a, view.b_mask);
  return view;
}

// Sampling + greedy sparsification fallback for large scopes.
DenseCheckResult dense_sampled(const ColouredBipartiteGraph& graph, const Subpair& scope,
                               double epsilon, double delta, const DenseCheckOptions& opts) {
  const int na = scope.size_a(), nb = scope.size_b();
  const int min_a = ceil_fraction(epsilon, na);
  const int min_b = ceil_fraction(epsilon, nb);

  double best = 2.0;
  Subpair best_pair;
  auto consider = [&](const std::vector<int>& a, const std::vector<int>& b, double dens) {
    if (dens < best) {
      best = dens;
      best_pair = {a, b};
    }
  };

  // Greedy sparsification: repeatedly drop the highest-degree vertex.
  {
    PairView view = make_view(graph, scope);
    std::vector<std::int64_t> deg_a(graph.size_a(), 0), deg_b(graph.size_b(), 0);
    for (int v : view.a) {
      for (int id : graph.edges_at_a(v)) {
        const ColouredEdge& e = graph.edge(id);
        if (view.b_mask[e.b]) {
          ++deg_a[v];
          ++deg_b[e.b];
        }
      }
    }
    consider(view.a, view.b, view.dens());
    while (static_cast<int>(view.a.size()) > min_a ||
           static_cast<int>(view.b.size()) > min_b) {
      int pick = -1;
      Side side = Side::A;
      std::int64_t pick_deg = -1;
      if (static_cast<int>(view.a.size()) > min_a) {
        for (int v : view.a) {
          if (deg_a[v] > pick_deg) {
            pick_deg = deg_a[v];
            pick = v;
            side = Side::A;
          }
        }
      }
      if (static_cast<int>(view.b.size()) > min_b) {
        for (int v : view.b) {
          if (deg_b[v] > pick_deg) {
            pick_deg = deg_b[v];
            pick = v;
            side = Side::B;
          }
        }
      }
      if (pick < 0) break;
      if (side == Side::A) {
        view.a.erase(std::find(view.a.begin(), view.a.end(), pick));
        view.a_mask[pick] = 0;
        for (int id : graph.edges_at_a(pick)) {
          const ColouredEdge& e = graph.edge(id);
          if (view.b_mask[e.b]) {
            --deg_b[e.b];
            --view.edges;
          }
        }
        deg_a[pick] = 0;
      } else {
        view.b.erase(std::find(view.b.begin(), view.b.end(), pick));
        view.b_mask[pick] = 0;
        for (int id : graph.edges_at_b(pick)) {
          const ColouredEdge& e = graph.edge(id);
          if (view.a_mask[e.a]) {
            --deg_a[e.a];
            --view.edges;
          }
        }
        deg_b[pick] = 0;
      }
      consider(view.a, view.b, view.dens());
    }
  }

  // Seeded random subpairs at the threshold sizes.
  Rng rng(mix_seed(opts.seed, 0xd45e));
  std::vector<int> pool_a = scope.a, pool_b = scope.b;
  for (int s = 0; s < opts.samples; ++s) {
    for (int i = 0; i < min_a; ++i) std::swap(pool_a[i], pool_a[i + rng.below(na - i)]);
    for (int i = 0; i < min_b; ++i) std::swap(pool_b[i], pool_b[i + rng.below(nb - i)]);
    std::vector<int> sa(pool_a.begin(), pool_a.begin() + min_a);
    std::vector<int> sb(pool_b.begin(), pool_b.begin() + min_b);
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const std::vector<char> sb_mask = mask_of(sb, graph.size_b());
    const double dens = static_cast<double>(count_edges(graph, sa, sb_mask)) /
                        (static_cast<double>(min_a) * min_b);
    consider(sa, sb, dens);
  }

  DenseCheckResult result;
  result.exact = false;
  if (best < delta - 1e-12) {
    // Verify the witness by direct recount before returning it.
    std::sort(best_pair.a.begin(), best_pair.a.end());
    std::sort(best_pair.b.begin(), best_pair.b.end());
    const std::vector<char> vb = mask_of(best_pair.b, graph.size_b());
    const std::int64_t edges = count_edges(graph, best_pair.a, vb);
    const double dens = static_cast<double>(edges) /
                        (static_cast<double>(best_pair.a.size()) * best_pair.b.size());
    if (dens < delta - 1e-12) {
      result.dense = false;
      result.exact = true;  // the violator itself is certified
      result.violator = best_pair;
      result.violator_density = dens;
      return result;
    }
  }
  result.dense = true;
  return result;
}

}  // namespace

DenseCheckResult is_dense(const ColouredBipartiteGraph& graph, const Subpair& scope,
                          double epsilon, double delta, const DenseCheckOptions& opts) {
  if (scope.a.empty() || scope.b.empty()) {
    throw std::invalid_argument("density scope must have nonempty parts");
  }
  const int na = scope.size_a(), nb = scope.size_b();
  const int small = std::min(na, nb), large = std::max(na, nb);
  // The enumeration uses 32-bit masks over the smaller side.
  if (small <= std::min(opts.exact_min_side, 20) && large <= opts.exact_max_other) {
    return dense_exact(graph, scope, epsilon, delta, na <= nb);
  }
  return dense_sampled(graph, scope, epsilon, delta, opts);
}

DenseCheckResult is_dense(const ColouredBipartiteGraph& graph, double epsilon, double delta,
                          const DenseCheckOptions& opts) {
  std::vector<int> a(graph.size_a()), b(graph.size_b());
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), 0);
  return is_dense(graph, {std::move(a), std::move(b)}, epsilon, delta, opts);
}

namespace {

// Trim the longer side to match the shorter, keeping highest in-pair degree
// (ties: lower index kept first).
Subpair equalise(const ColouredBipartiteGraph& graph, Subpair pair) {
  if (pair.a.size() == pair.b.size()) return pair;
  const bool trim_a = pair.a.size() > pair.b.size();
  const std::size_t target = std::min(pair.a.size(), pair.b.size());
  const std::vector<char> other_mask =
      trim_a ? mask_of(pair.b, graph.size_b()) : mask_of(pair.a, graph.size_a());
  std::vector<int>& side = trim_a ? pair.a : pair.b;
  std::vector<std::pair<int, int>> ranked;  // (-degree, index)
  ranked.reserve(side.size());
  for (int v : side) {
    int deg = 0;
    auto span = trim_a ? graph.edges_at_a(v) : graph.edges_at_b(v);
    for (int id : span) {
      const ColouredEdge& e = graph.edge(id);
      if (other_mask[trim_a ? e.b : e.a]) ++deg;
    }
    ranked.push_back({-deg, v});
  }
  std::sort(ranked.begin(), ranked.end());
  side.clear();
  for (std::size_t i = 0; i < target; ++i) side.push_back(ranked[i].second);
  std::sort(side.begin(), side.end());
  return pair;
}

}  // namespace

DenseSubpairResult dense_subpair(const ColouredBipartiteGraph& graph,
                                 const DensityParams& params, double d,
                                 const DenseCheckOptions& opts) {
  params.validate();
  if (!(d > 0.0)) throw std::invalid_argument("input density must be positive");

  DenseSubpairResult result;
  result.size_floor = std::pow(d, params.size_exponent()) * graph.size_a() / 2.0;
  if (graph.edge_count() == 0) {
    result.error = "graph has no edges";
    return result;
  }

  std::vector<int> all_a(graph.size_a()), all_b(graph.size_b());
  std::iota(all_a.begin(), all_a.end(), 0);
  std::iota(all_b.begin(), all_b.end(), 0);
  Subpair cur = equalise(graph, {all_a, all_b});
  double cur_density = density(graph, cur).value();

  const double growth = 1.0 + params.c * params.epsilon;
  const int cap =
      static_cast<int>(std::ceil(std::log(1.0 / std::max(cur_density, 1e-9)) / std::log(growth))) + 8;

  while (true) {
    DenseCheckResult check =
        is_dense(graph, cur, params.epsilon, params.c_prime * cur_density, opts);
    result.exact = result.exact && check.exact;
    if (check.dense) break;

    if (result.iterations >= cap) {
      result.error = "density increment iteration cap exceeded";
      return result;
    }
    ++result.iterations;

    const Subpair& w = *check.violator;
    std::vector<int> comp_a, comp_b;
    {
      const std::vector<char> wa = mask_of(w.a, graph.size_a());
      const std::vector<char> wb = mask_of(w.b, graph.size_b());
      for (int v : cur.a) {
        if (!wa[v]) comp_a.push_back(v);
      }
      for (int v : cur.b) {
        if (!wb[v]) comp_b.push_back(v);
      }
    }
    const int min_a = ceil_fraction(params.epsilon, cur.size_a());
    const int min_b = ceil_fraction(params.epsilon, cur.size_b());
    const std::vector<const std::vector<int>*> a_opts = {&w.a, &comp_a, &cur.a};
    const std::vector<const std::vector<int>*> b_opts = {&w.b, &comp_b, &cur.b};
    double best_density = -1.0;
    Subpair best;
    for (std::size_t i = 0; i < a_opts.size(); ++i) {
      for (std::size_t j = 0; j < b_opts.size(); ++j) {
        if (i == 0 && j == 0) continue;  // the witness itself
        if (i == 2 && j == 2) continue;  // no progress
        const auto& ca = *a_opts[i];
        const auto& cb = *b_opts[j];
        if (static_cast<int>(ca.size()) < min_a || static_cast<int>(cb.size()) < min_b) continue;
        const double dens = density(graph, {ca, cb}).value();
        if (dens > best_density + 1e-15) {
          best_density = dens;
          best = {ca, cb};
        }
      }
    }
    if (best_density <= cur_density + 1e-15) {
      result.error = "no witness-induced candidate increases density";
      return result;
    }
    if (best_density < growth * cur_density - 1e-12) ++result.growth_shortfalls;
    cur = equalise(graph, best);
    cur_density = density(graph, cur).value();
  }

  if (static_cast<double>(cur.size_a()) < result.size_floor - 1e-9) {
    result.error = "dense subpair below the guaranteed size floor";
    result.pair = cur;
    result.pair_density = cur_density;
    return result;
  }
  result.ok = true;
  result.pair = cur;
  result.pair_density = cur_density;
  return result;
}

namespace {

struct PruneState {
  std::vector<char> in_a, in_b;
  std::vector<int> deg_a, deg_b;  // degree within the current pair
  int size = 0;                   // per side (kept balanced)
};

void remove_vertex(const ColouredBipartiteGraph& graph, PruneState& st, Side side, int v) {
  if (side == Side::A) {
    st.in_a[v] = 0;
    st.deg_a[v] = 0;
    for (int id : graph.edges_at_a(v)) {
      const ColouredEdge& e = graph.edge(id);
      if (st.in_b[e.b]) --st.deg_b[e.b];
    }
  } else {
    st.in_b[v] = 0;
    st.deg_b[v] = 0;
    for (int id : graph.edges_at_b(v)) {
      const ColouredEdge& e = graph.edge(id);
      if (st.in_a[e.a]) --st.deg_a[e.a];
    }
  }
}

int lowest_active(const std::vector<char>& mask) {
  for (int v = 0; v < static_cast<int>(mask.size()); ++v) {
    if (mask[v]) return v;
  }
  return -1;
}

}  // namespace

RobustPairResult prune_to_robust(const ColouredBipartiteGraph& graph, const Subpair& pair,
                                 double d, double min_deg_coef, const DensityParams& params,
                                 const PruneOptions& opts) {
  params.validate();
  if (pair.a.size() != pair.b.size() || pair.a.empty()) {
    throw std::invalid_argument("prune_to_robust needs a nonempty balanced pair");
  }
  const int initial = pair.size_a();  // thresholds stay pinned to the input pair size
  double tau = min_deg_coef * d * initial;
  if (opts.scaled) tau = std::max(tau, 1.0);

  RobustPairResult result;
  PruneState st;
  st.in_a = mask_of(pair.a, graph.size_a());
  st.in_b = mask_of(pair.b, graph.size_b());
  st.deg_a.assign(graph.size_a(), 0);
  st.deg_b.assign(graph.size_b(), 0);
  st.size = initial;
  for (int v : pair.a) {
    for (int id : graph.edges_at_a(v)) {
      const ColouredEdge& e = graph.edge(id);
      if (st.in_b[e.b]) {
        ++st.deg_a[v];
        ++st.deg_b[e.b];
      }
    }
  }

  const int deletion_budget =
      static_cast<int>(std::ceil(2.0 * params.epsilon * initial - 1e-9));
  const int set_limit = ceil_fraction(params.epsilon, initial) - 1;
  int deleted = 0;
  int step = 0;

  auto rebalance = [&](Side removed_side, int count, DeletionEvent& event) {
    for (int i = 0; i < count; ++i) {
      const int v =
          removed_side == Side::A ? lowest_active(st.in_b) : lowest_active(st.in_a);
      if (v < 0) break;
      event.rebalance.push_back(v);
      remove_vertex(graph, st, removed_side == Side::A ? Side::B : Side::A, v);
    }
  };

  while (st.size > 0 && deleted < deletion_budget) {
    // Type (i): lowest deficient vertex, side A first.
    int victim = -1;
    Side side = Side::A;
    for (int v = 0; v < graph.size_a(); ++v) {
      if (st.in_a[v] && st.deg_a[v] <= tau + 1e-12) {
        victim = v;
        break;
      }
    }
    if (victim < 0) {
      for (int v = 0; v < graph.size_b(); ++v) {
        if (st.in_b[v] && st.deg_b[v] <= tau + 1e-12) {
          victim = v;
          side = Side::B;
          break;
        }
      }
    }
    if (victim >= 0) {
      DeletionEvent event{++step, 'i', side, {victim}, {}};
      remove_vertex(graph, st, side, victim);
      rebalance(side, 1, event);
      --st.size;
      ++deleted;
      result.robust.provenance.push_back(std::move(event));
      continue;
    }

    // Type (ii): a small set with |N(S)| <= 2|S| on either side.
    if (set_limit < 1) break;
    Subpair cur;
    for (int v = 0; v < graph.size_a(); ++v) {
      if (st.in_a[v]) cur.a.push_back(v);
    }
    for (int v = 0; v < graph.size_b(); ++v) {
      if (st.in_b[v]) cur.b.push_back(v);
    }
    InducedPair local = induce(graph, cur);
    ExpansionOptions eopts{opts.exact_limit, opts.restarts, mix_seed(opts.seed, step), -1};
    bool removed_set = false;
    for (Side s : {Side::A, Side::B}) {
      ShrinkingSetResult shrink = find_shrinking_set(local.graph, s, 2.0, set_limit, eopts);
      result.type2_exact = result.type2_exact && (shrink.set || shrink.exact_none);
      if (!shrink.set) continue;
      DeletionEvent event{++step, 's', s, {}, {}};
      for (int local_v : *shrink.set) {
        event.removed.push_back(s == Side::A ? local.map_a[local_v] : local.map_b[local_v]);
      }
      for (int v : event.removed) remove_vertex(graph, st, s, v);
      rebalance(s, static_cast<int>(event.removed.size()), event);
      st.size -= static_cast<int>(event.removed.size());
      deleted += static_cast<int>(event.removed.size());
      result.robust.provenance.push_back(std::move(event));
      removed_set = true;
      break;
    }
    if (!removed_set) break;
  }

  result.deleted_per_side = deleted;
  Subpair final_pair;
  for (int v = 0; v < graph.size_a(); ++v) {
    if (st.in_a[v]) final_pair.a.push_back(v);
  }
  for (int v = 0; v < graph.size_b(); ++v) {
    if (st.in_b[v]) final_pair.b.push_back(v);
  }
  result.robust.pair = final_pair;
  result.robust.degree_threshold = tau;

  if (deleted >= deletion_budget) {
    result.error = "deleted 2*epsilon*|A'| vertices per side; input was not robustly dense";
    return result;
  }
  if (final_pair.a.empty()) {
    result.error = "pair emptied out";
    return result;
  }

  int min_deg = graph.size_b();
  for (int v : final_pair.a) min_deg = std::min(min_deg, st.deg_a[v]);
  for (int v : final_pair.b) min_deg = std::min(min_deg, st.deg_b[v]);
  result.robust.min_degree = min_deg;
  result.robust.expansion = {2.0, std::max(1, 2 * final_pair.size_a() / 3)};
  result.ok = true;
  return result;
}

RobustPairCheck verify_robust_pair(const ColouredBipartiteGraph& graph,
                                   const RobustPair& robust, const ExpansionOptions& opts) {
  RobustPairCheck check;
  InducedPair local = induce(graph, robust.pair);
  int min_deg = local.graph.n_b;
  for (const auto& row : local.graph.adj) min_deg = std::min(min_deg, static_cast<int>(row.size()));
  BipartiteGraph t = local.graph.transposed();
  for (const auto& row : t.adj) min_deg = std::min(min_deg, static_cast<int>(row.size()));
  check.min_degree = min_deg;
  check.min_degree_ok = min_deg >= robust.min_degree && min_deg > robust.degree_threshold;
  check.expansion_a = expansion_check(local.graph, Side::A, robust.expansion, opts);
  check.expansion_b = expansion_check(local.graph, Side::B, robust.expansion, opts);
  return check;
}

}  // namespace rainbow
