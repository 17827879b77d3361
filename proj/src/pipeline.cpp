#include "rainbow/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rainbow/oracle.hpp"
#include "rainbow/rng.hpp"

namespace rainbow {

namespace {

std::vector<char> mask_of(const std::vector<int>& vs, int size) {
  std::vector<char> mask(size, 0);
  for (int v : vs) mask[v] = 1;
  return mask;
}

std::vector<char> colour_mask(const RainbowMatching& m, int colour_bound) {
  std::vector<char> mask(colour_bound, 0);
  for (const ColouredEdge& e : m.edges) mask[e.colour] = 1;
  return mask;
}

std::vector<int> seeded_permutation(const std::vector<int>& items, std::uint64_t seed) {
  std::vector<int> out = items;
  Rng rng(seed);
  for (int i = static_cast<int>(out.size()) - 1; i > 0; --i) {
    std::swap(out[i], out[rng.below(i + 1)]);
  }
  return out;
}

}  // namespace

double PipelineParams::reserve_p(int n) const {
  return std::min(std::pow(std::max(n, 1), -reserve_exp), 0.999);
}

double PipelineParams::theta(int n) const { return std::pow(std::max(n, 1), -theta_exp); }

int PipelineParams::theta_floor(int n) const {
  return 4 * static_cast<int>(std::ceil(std::log2(std::max(n, 2)))) + 1;
}

int PipelineParams::theta_threshold(int n, int a1_size) const {
  const int raw = static_cast<int>(std::ceil(theta(n) * a1_size - 1e-9));
  if (!scaled) return std::max(raw, 1);
  return std::max(raw, theta_floor(n));
}

int PipelineParams::step_cap(int n) const {
  return static_cast<int>(std::ceil(step_cap_multiplier * std::log2(std::max(n, 2)))) + 4;
}

double PipelineParams::d_min(int n) const { return std::pow(std::max(n, 2), -d_min_exp); }

PipelineParams parse_pipeline_params(std::string_view text) {
  PipelineParams params;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream row(line);
    std::string name;
    if (!(row >> name)) continue;
    double value;
    if (!(row >> value)) {
      throw std::invalid_argument("params line " + std::to_string(line_no) + ": missing value");
    }
    if (name == "reserve_exp") {
      params.reserve_exp = value;
    } else if (name == "theta_exp") {
      params.theta_exp = value;
    } else if (name == "min_deg_coef") {
      params.min_deg_coef = value;
    } else if (name == "trim_coef") {
      params.trim_coef = value;
    } else if (name == "epsilon") {
      params.epsilon = value;
      params.density.epsilon = value;
    } else if (name == "c") {
      params.density.c = value;
    } else if (name == "c_prime") {
      params.density.c_prime = value;
    } else if (name == "step_cap_multiplier") {
      params.step_cap_multiplier = value;
    } else if (name == "d_min_exp") {
      params.d_min_exp = value;
    } else if (name == "scaled") {
      params.scaled = value != 0.0;
    } else {
      throw std::invalid_argument("params line " + std::to_string(line_no) +
                                  ": unknown field " + name);
    }
  }
  return params;
}

ReservationSplit reserve_colours(const ColouredBipartiteGraph& full, const Subpair& core,
                                 double p, std::uint64_t seed) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("reservation probability must be in [0,1)");
  ReservationSplit split;
  split.core = core;
  split.reserved.assign(full.colour_bound(), 0);
  const auto threshold = static_cast<std::uint64_t>(
      p * static_cast<double>(std::numeric_limits<std::uint64_t>::max()));
  for (int colour = 0; colour < full.colour_bound(); ++colour) {
    auto cls = full.colour_class(colour);
    if (cls.empty()) continue;
    const ColouredEdge& least = full.edge(cls.front());
    const std::uint64_t key = static_cast<std::uint64_t>(least.a) * full.size_b() + least.b;
    if (mix_seed(seed, key) < threshold) {
      split.reserved[colour] = 1;
      split.reserved_colours.push_back(colour);
    }
  }

  const std::vector<char> in_a = mask_of(core.a, full.size_a());
  const std::vector<char> in_b = mask_of(core.b, full.size_b());
  std::vector<ColouredEdge> gr_edges, star_edges;
  std::vector<int> deg_into_a1(full.size_b(), 0), deg_into_b1(full.size_a(), 0);
  for (const ColouredEdge& e : full.edges()) {
    if (split.reserved[e.colour]) {
      gr_edges.push_back(e);
      if (in_a[e.a]) ++deg_into_a1[e.b];
      if (in_b[e.b]) ++deg_into_b1[e.a];
    } else if (!in_a[e.a] && !in_b[e.b]) {
      star_edges.push_back(e);
    }
  }
  split.gr = ColouredBipartiteGraph(full.size_a(), full.size_b(), full.colour_bound(),
                                    std::move(gr_edges));
  split.g_star = ColouredBipartiteGraph(full.size_a(), full.size_b(), full.colour_bound(),
                                        std::move(star_edges));

  ReservationStats& stats = split.stats;
  stats.p = p;
  stats.reserved_colours = static_cast<int>(split.reserved_colours.size());
  stats.expected_reserved = p * full.distinct_colours();
  const double mean = p * core.size_a();
  const double band = std::pow(std::max(mean, 0.0), 2.0 / 3.0);
  stats.band_low = mean - band;
  stats.band_high = mean + band;
  stats.total_b = full.size_b();
  stats.total_a = full.size_a();
  if (!core.a.empty()) {
    for (int b = 0; b < full.size_b(); ++b) {
      if (deg_into_a1[b] < stats.band_low || deg_into_a1[b] > stats.band_high) ++stats.outside_b;
    }
  }
  if (!core.b.empty()) {
    for (int a = 0; a < full.size_a(); ++a) {
      if (deg_into_b1[a] < stats.band_low || deg_into_b1[a] > stats.band_high) ++stats.outside_a;
    }
  }
  return split;
}

RainbowMatching greedy_rainbow(const ColouredBipartiteGraph& graph, std::uint64_t seed) {
  std::vector<int> order(graph.size_a());
  std::iota(order.begin(), order.end(), 0);
  order = seeded_permutation(order, mix_seed(seed, 0x6eed));
  std::vector<char> b_used(graph.size_b(), 0), colour_used(graph.colour_bound(), 0);
  RainbowMatching m;
  for (int a : order) {
    for (int id : graph.edges_at_a(a)) {
      const ColouredEdge& e = graph.edge(id);
      if (b_used[e.b] || colour_used[e.colour]) continue;
      b_used[e.b] = colour_used[e.colour] = 1;
      m.edges.push_back(e);
      break;
    }
  }
  std::sort(m.edges.begin(), m.edges.end(),
            [](const ColouredEdge& x, const ColouredEdge& y) { return x.a < y.a; });
  if (!is_rainbow_matching(graph, m)) {
    throw std::logic_error("greedy_rainbow produced an invalid matching");
  }
  return m;
}

ReachState build_reach(const ColouredBipartiteGraph& g_star, const RainbowMatching& m2,
                       const std::vector<int>& a0, const std::vector<int>& b0,
                       int threshold, int step_cap) {
  if (threshold < 1) throw std::invalid_argument("reach threshold must be at least 1");
  ReachState st;
  st.threshold = threshold;
  st.a0 = a0;
  st.b0 = b0;
  st.colour_ts.assign(g_star.colour_bound(), 0);
  for (const ColouredEdge& e : m2.edges) st.colour_ts[e.colour] = -1;
  const int m = m2.size();
  st.in_ra.assign(m, 0);
  st.in_rb.assign(m, 0);
  st.first_set_ra.assign(m, 0);

  const std::vector<char> a0_mask = mask_of(a0, g_star.size_a());
  const std::vector<char> b0_mask = mask_of(b0, g_star.size_b());

  // C-coloured edges from the matched endpoint into the leftover set.
  auto qualifies = [&](int edge_idx, bool phase_a) {
    const ColouredEdge& e = m2.edges[edge_idx];
    int count = 0;
    if (phase_a) {
      for (int id : g_star.edges_at_b(e.b)) {
        const ColouredEdge& f = g_star.edge(id);
        if (a0_mask[f.a] && st.colour_ts[f.colour] >= 0 && ++count >= threshold) return true;
      }
    } else {
      for (int id : g_star.edges_at_a(e.a)) {
        const ColouredEdge& f = g_star.edge(id);
        if (b0_mask[f.b] && st.colour_ts[f.colour] >= 0 && ++count >= threshold) return true;
      }
    }
    return false;
  };

  int ts = 0;
  auto run_phase = [&](bool phase_a, ReachStep& step) -> bool {
    ++ts;
    std::vector<int> batch;
    for (int i = 0; i < m; ++i) {
      if (phase_a ? st.in_ra[i] : st.in_rb[i]) continue;
      if (qualifies(i, phase_a)) batch.push_back(i);
    }
    int hit = -1;
    for (int i : batch) {
      if (phase_a) {
        st.in_ra[i] = 1;
        st.r_a.push_back(i);
        if (!st.in_rb[i]) st.first_set_ra[i] = 1;
        if (st.in_rb[i] && hit < 0) hit = i;
        step.added_a.push_back(i);
      } else {
        st.in_rb[i] = 1;
        st.r_b.push_back(i);
        if (st.in_ra[i] && hit < 0) hit = i;
        step.added_b.push_back(i);
      }
      const int colour = m2.edges[i].colour;
      if (st.colour_ts[colour] < 0) {
        st.colour_ts[colour] = ts;
        (phase_a ? step.colours_a : step.colours_b).push_back(colour);
      }
    }
    if (hit >= 0) {
      st.terminated_with = ReachTermination::Intersection;
      st.intersection_edge = hit;
      return true;
    }
    return false;
  };

  for (st.steps = 1; st.steps <= step_cap; ++st.steps) {
    ReachStep step;
    const bool done_a = run_phase(true, step);
    if (done_a) {
      st.step_log.push_back(std::move(step));
      return st;
    }
    const bool done_b = run_phase(false, step);
    const bool grew = !step.added_a.empty() || !step.added_b.empty();
    st.step_log.push_back(std::move(step));
    if (done_b) return st;
    if (!grew) {
      st.terminated_with = ReachTermination::Stalled;
      return st;
    }
  }
  st.steps = step_cap;
  st.terminated_with = ReachTermination::StepCap;
  return st;
}

namespace {

struct ColourKey {
  int ts;
  int colour;
  friend bool operator<(const ColourKey& x, const ColourKey& y) {
    return x.ts != y.ts ? x.ts < y.ts : x.colour < y.colour;
  }
};

}  // namespace

TraceBackResult trace_back(const ColouredBipartiteGraph& g_star, const RainbowMatching& m2,
                           const ReachState& reach) {
  TraceBackResult result;
  if (reach.terminated_with != ReachTermination::Intersection || reach.intersection_edge < 0) {
    result.error = "reach did not terminate with an intersection edge";
    return result;
  }

  const int m = m2.size();
  std::vector<char> present(m, 1);
  std::vector<int> colour_to_m2(g_star.colour_bound(), -1);
  for (int i = 0; i < m; ++i) colour_to_m2[m2.edges[i].colour] = i;

  std::vector<char> used_a(g_star.size_a(), 0), used_b(g_star.size_b(), 0);
  for (const ColouredEdge& e : m2.edges) used_a[e.a] = used_b[e.b] = 1;
  const std::vector<char> a0_mask = mask_of(reach.a0, g_star.size_a());
  const std::vector<char> b0_mask = mask_of(reach.b0, g_star.size_b());
  std::vector<char> new_colour(g_star.colour_bound(), 0);
  std::vector<ColouredEdge> added;

  // Least (timestamp, colour, endpoint) admissible edge from a matched
  // endpoint into the leftover set; optionally bounded strictly earlier than
  // a conflict colour.
  auto pick = [&](int vertex, bool into_a0, std::optional<ColourKey> earlier_than)
      -> std::optional<ColouredEdge> {
    std::optional<ColouredEdge> best;
    ColourKey best_key{0, 0};
    auto span = into_a0 ? g_star.edges_at_b(vertex) : g_star.edges_at_a(vertex);
    for (int id : span) {
      const ColouredEdge& e = g_star.edge(id);
      const int other = into_a0 ? e.a : e.b;
      if (into_a0 ? (!a0_mask[other] || used_a[other]) : (!b0_mask[other] || used_b[other])) {
        continue;
      }
      const int ts = reach.colour_ts[e.colour];
      if (ts < 0 || new_colour[e.colour]) continue;
      const ColourKey key{ts, e.colour};
      if (earlier_than && !(key < *earlier_than)) continue;
      if (!best || key < best_key ||
          (key.ts == best_key.ts && key.colour == best_key.colour && other < (into_a0 ? best->a : best->b))) {
        best = e;
        best_key = key;
      }
    }
    return best;
  };

  auto add_edge = [&](const ColouredEdge& e) {
    added.push_back(e);
    new_colour[e.colour] = 1;
    used_a[e.a] = used_b[e.b] = 1;
  };

  const int hit = reach.intersection_edge;
  const ColouredEdge ab = m2.edges[hit];
  present[hit] = 0;

  auto first = pick(ab.b, true, std::nullopt);
  if (!first) {
    result.error = "no admissible edge from the intersection B-endpoint into A0";
    return result;
  }
  add_edge({first->a, ab.b, first->colour});
  auto second = pick(ab.a, false, std::nullopt);
  if (!second) {
    result.error = "no admissible edge from the intersection A-endpoint into B0";
    return result;
  }
  add_edge({ab.a, second->b, second->colour});

  // An added edge is active while its colour is shared with a still-present
  // m2 edge; resolve actives smallest (a, b) first.
  auto is_active = [&](const ColouredEdge& e) {
    const int owner = colour_to_m2[e.colour];
    return owner >= 0 && present[owner];
  };
  auto next_active = [&]() -> std::optional<ColouredEdge> {
    std::optional<ColouredEdge> best;
    for (const ColouredEdge& e : added) {
      if (!is_active(e)) continue;
      if (!best || e.a < best->a || (e.a == best->a && e.b < best->b)) best = e;
    }
    return best;
  };

  const int max_steps = 8 * reach.threshold + 64;
  while (auto active = next_active()) {
    if (++result.replacement_steps > max_steps) {
      result.error = "trace-back replacement step cap exceeded";
      return result;
    }
    const int owner = colour_to_m2[active->colour];
    const ColouredEdge conflict = m2.edges[owner];
    const ColourKey conflict_key{reach.colour_ts[conflict.colour], conflict.colour};
    // The endpoint whose reach qualification vouches for earlier options.
    const bool use_b_endpoint = reach.first_set_ra[owner] != 0;
    auto replacement = pick(use_b_endpoint ? conflict.b : conflict.a, use_b_endpoint,
                            conflict_key);
    if (!replacement) {
      result.error = "no earlier-coloured replacement with a fresh endpoint";
      return result;
    }
    present[owner] = 0;
    if (use_b_endpoint) {
      used_a[conflict.a] = 0;  // the A-endpoint of the deleted edge is released
      add_edge({replacement->a, conflict.b, replacement->colour});
    } else {
      used_b[conflict.b] = 0;
      add_edge({conflict.a, replacement->b, replacement->colour});
    }
  }

  RainbowMatching out;
  for (int i = 0; i < m; ++i) {
    if (present[i]) out.edges.push_back(m2.edges[i]);
  }
  out.edges.insert(out.edges.end(), added.begin(), added.end());
  std::sort(out.edges.begin(), out.edges.end(),
            [](const ColouredEdge& x, const ColouredEdge& y) { return x.a < y.a; });
  if (out.size() != m + 1 || !is_rainbow_matching(g_star, out)) {
    throw std::logic_error("trace_back produced an invalid matching");
  }
  result.ok = true;
  result.matching = std::move(out);
  return result;
}

RainbowMatching augmenting_rainbow(const ColouredBipartiteGraph& graph, std::uint64_t seed,
                                   const PipelineParams& params, int ref_size,
                                   AugmentStats* stats) {
  AugmentStats local;
  RainbowMatching m = greedy_rainbow(graph, mix_seed(seed, 1));
  local.greedy_size = m.size();

  // Active vertices are those with at least one edge; the benchmark minimum
  // degree is taken over them.
  std::vector<char> active_a(graph.size_a(), 0), active_b(graph.size_b(), 0);
  int min_deg = std::numeric_limits<int>::max();
  for (int a = 0; a < graph.size_a(); ++a) {
    if (graph.degree_a(a) > 0) {
      active_a[a] = 1;
      min_deg = std::min(min_deg, graph.degree_a(a));
    }
  }
  for (int b = 0; b < graph.size_b(); ++b) {
    if (graph.degree_b(b) > 0) {
      active_b[b] = 1;
      min_deg = std::min(min_deg, graph.degree_b(b));
    }
  }
  if (min_deg == std::numeric_limits<int>::max()) min_deg = 0;
  local.min_degree = min_deg;
  local.benchmark = min_deg - 2.0 * std::pow(min_deg, 2.0 / 3.0);

  const int n = std::max({graph.size_a(), graph.size_b(), 2});
  const int threshold = params.theta_threshold(n, ref_size < 0 ? graph.size_a() : ref_size);
  const int cap = params.step_cap(n);

  while (true) {
    std::vector<int> a0, b0;
    std::vector<char> cov_a(graph.size_a(), 0), cov_b(graph.size_b(), 0);
    for (const ColouredEdge& e : m.edges) cov_a[e.a] = cov_b[e.b] = 1;
    for (int a = 0; a < graph.size_a(); ++a) {
      if (active_a[a] && !cov_a[a]) a0.push_back(a);
    }
    for (int b = 0; b < graph.size_b(); ++b) {
      if (active_b[b] && !cov_b[b]) b0.push_back(b);
    }
    if (a0.empty() || b0.empty()) break;
    ++local.reach_calls;
    ReachState reach = build_reach(graph, m, a0, b0, threshold, cap);
    if (reach.terminated_with != ReachTermination::Intersection) break;
    TraceBackResult tb = trace_back(graph, m, reach);
    if (!tb.ok) {
      ++local.trace_failures;
      break;
    }
    m = std::move(tb.matching);
    ++local.augmentations;
  }

  local.benchmark_met = m.size() >= local.benchmark - 1e-9;
  if (stats) *stats = local;
  if (!is_rainbow_matching(graph, m)) {
    throw std::logic_error("augmenting_rainbow produced an invalid matching");
  }
  return m;
}

std::string format_stage(const StageRecord& record) {
  std::ostringstream out;
  out << "stage=" << record.stage << " ok=" << (record.ok ? 1 : 0);
  for (const auto& [name, value] : record.metrics) {
    out << ' ' << name << '=';
    if (value == static_cast<long long>(value) && std::abs(value) < 1e15) {
      out << static_cast<long long>(value);
    } else {
      out << value;
    }
  }
  if (!record.note.empty()) out << " note=\"" << record.note << '"';
  return out.str();
}

TrimResult trim_core(const ColouredBipartiteGraph& g1, const Subpair& core,
                     const std::vector<char>& m2_colours, double d,
                     const PipelineParams& params) {
  TrimResult result;
  const int a1 = core.size_a();
  double loss_threshold = params.trim_coef * d * a1;
  if (params.scaled) loss_threshold = std::max(loss_threshold, 1.0);
  result.loss_threshold = loss_threshold;
  int r = a1 - static_cast<int>(std::floor((1.0 - params.trim_coef * d) * a1 + 1e-9));
  if (params.scaled && a1 >= 3) r = std::max(r, 1);
  r = std::min(r, std::max(a1 - 1, 0));

  const std::vector<char> in_a = mask_of(core.a, g1.size_a());
  const std::vector<char> in_b = mask_of(core.b, g1.size_b());
  std::vector<int> loss_a(g1.size_a(), 0), loss_b(g1.size_b(), 0);
  for (int a : core.a) {
    for (int id : g1.edges_at_a(a)) {
      const ColouredEdge& e = g1.edge(id);
      if (in_b[e.b] && m2_colours[e.colour]) {
        ++loss_a[a];
        ++loss_b[e.b];
      }
    }
  }

  auto pick_removals = [&](const std::vector<int>& side, const std::vector<int>& loss,
                           int& over_count) {
    std::vector<int> heavy;
    for (int v : side) {
      if (loss[v] > loss_threshold + 1e-9) heavy.push_back(v);
    }
    over_count = static_cast<int>(heavy.size());
    std::stable_sort(heavy.begin(), heavy.end(),
                     [&](int x, int y) { return loss[x] > loss[y]; });
    std::vector<int> out;
    std::vector<char> taken(loss.size(), 0);
    for (int v : heavy) {
      if (static_cast<int>(out.size()) == r) break;
      out.push_back(v);
      taken[v] = 1;
    }
    for (int v : side) {
      if (static_cast<int>(out.size()) == r) break;
      if (!taken[v]) {
        out.push_back(v);
        taken[v] = 1;
      }
    }
    return out;
  };

  int over_a = 0, over_b = 0;
  const std::vector<int> drop_a = pick_removals(core.a, loss_a, over_a);
  const std::vector<int> drop_b = pick_removals(core.b, loss_b, over_b);
  result.over_threshold_a = over_a;
  result.over_threshold_b = over_b;

  std::vector<char> gone_a = mask_of(drop_a, g1.size_a());
  std::vector<char> gone_b = mask_of(drop_b, g1.size_b());
  for (int v : core.a) {
    if (!gone_a[v]) result.trimmed.a.push_back(v);
  }
  for (int v : core.b) {
    if (!gone_b[v]) result.trimmed.b.push_back(v);
  }

  // Certify the post-trim minimum degree of G'1 (m2 colours removed).
  const std::vector<char> tb = mask_of(result.trimmed.b, g1.size_b());
  std::vector<int> deg_a(g1.size_a(), 0), deg_b(g1.size_b(), 0);
  for (int a : result.trimmed.a) {
    for (int id : g1.edges_at_a(a)) {
      const ColouredEdge& e = g1.edge(id);
      if (tb[e.b] && !m2_colours[e.colour]) {
        ++deg_a[a];
        ++deg_b[e.b];
      }
    }
  }
  int min_deg = result.trimmed.a.empty() ? 0 : g1.size_b();
  for (int v : result.trimmed.a) min_deg = std::min(min_deg, deg_a[v]);
  for (int v : result.trimmed.b) min_deg = std::min(min_deg, deg_b[v]);
  result.actual_min_degree = min_deg;
  double required = (params.min_deg_coef - 2.0 * params.trim_coef) * d * a1;
  if (params.scaled) required = std::max(required, 1.0);
  result.required_min_degree = required;
  if (min_deg < required) {
    result.ok = false;
    result.note = "trimmed core min degree below the certified bound";
  }
  return result;
}

HardLeftovers classify_hard_leftovers(const LatinArray& array, const Subpair& leftovers,
                                      const Subpair& trimmed,
                                      const std::vector<char>& m2_colours, double p,
                                      int a1_size) {
  HardLeftovers out;
  out.bound = p * a1_size / 4.0;
  for (int a : leftovers.a) {
    int hit = 0;
    for (int b : trimmed.b) {
      if (m2_colours[array.at(a, b)]) ++hit;
    }
    if (2 * hit >= trimmed.size_b()) out.hard.a.push_back(a);
  }
  for (int b : leftovers.b) {
    int hit = 0;
    for (int a : trimmed.a) {
      if (m2_colours[array.at(a, b)]) ++hit;
    }
    if (2 * hit >= trimmed.size_a()) out.hard.b.push_back(b);
  }
  out.bound_ok = out.hard.size_a() <= out.bound + 1e-9 && out.hard.size_b() <= out.bound + 1e-9;
  return out;
}

M0Result greedy_m0(const LatinArray& array, const std::vector<char>& reserved,
                   const Subpair& leftovers, const HardLeftovers& hard,
                   const Subpair& trimmed, const std::vector<char>& m2_colours,
                   std::uint64_t seed) {
  M0Result result;
  std::vector<char> colour_used = m2_colours;
  std::vector<char> used_a(array.n, 0), used_b(array.n, 0);
  const std::vector<int> order_b = seeded_permutation(trimmed.b, mix_seed(seed, 0xb0));
  const std::vector<int> order_a = seeded_permutation(trimmed.a, mix_seed(seed, 0xa0));
  const std::vector<char> hard_a = mask_of(hard.hard.a, array.n);
  const std::vector<char> hard_b = mask_of(hard.hard.b, array.n);

  auto fail = [&](const std::string& phase, bool from_a, int v) {
    int free_partner = 0, colour_blocked = 0, reserved_missing = 0;
    const auto& partners = from_a ? order_b : order_a;
    const bool need_reserved = phase == "reserved";
    for (int u : partners) {
      const int colour = from_a ? array.at(v, u) : array.at(u, v);
      if (from_a ? used_b[u] : used_a[u]) continue;
      ++free_partner;
      if (need_reserved && !reserved[colour]) {
        ++reserved_missing;
        continue;
      }
      if (colour_used[colour]) ++colour_blocked;
    }
    std::ostringstream msg;
    msg << "greedy M0 stuck at " << (from_a ? "row " : "column ") << v << " in the " << phase
        << " phase: " << free_partner << " free partners, " << colour_blocked
        << " colour-blocked, " << reserved_missing << " without a reserved colour";
    result.failure = FailureReport{"greedy-m0", msg.str(), "available choices >= 1", -1.0};
  };

  auto try_match = [&](int v, bool from_a, bool need_reserved) {
    const auto& partners = from_a ? order_b : order_a;
    for (int u : partners) {
      if (from_a ? used_b[u] : used_a[u]) continue;
      const int colour = from_a ? array.at(v, u) : array.at(u, v);
      if (need_reserved && !reserved[colour]) continue;
      if (colour_used[colour]) continue;
      colour_used[colour] = 1;
      if (from_a) {
        used_a[v] = used_b[u] = 1;
        result.m0.edges.push_back({v, u, colour});
      } else {
        used_a[u] = used_b[v] = 1;
        result.m0.edges.push_back({u, v, colour});
      }
      return true;
    }
    return false;
  };

  for (int a : hard.hard.a) {
    if (!try_match(a, true, true)) {
      fail("reserved", true, a);
      return result;
    }
  }
  for (int b : hard.hard.b) {
    if (!try_match(b, false, true)) {
      fail("reserved", false, b);
      return result;
    }
  }
  for (int a : leftovers.a) {
    if (hard_a[a]) continue;
    if (!try_match(a, true, false)) {
      fail("open", true, a);
      return result;
    }
  }
  for (int b : leftovers.b) {
    if (hard_b[b]) continue;
    if (!try_match(b, false, false)) {
      fail("open", false, b);
      return result;
    }
  }
  // Re-verify disjointness and cell colours before handing the matching on.
  std::vector<char> va(array.n, 0), vb(array.n, 0), vc(array.k, 0);
  for (const ColouredEdge& e : result.m0.edges) {
    if (va[e.a] || vb[e.b] || vc[e.colour] || array.at(e.a, e.b) != e.colour ||
        m2_colours[e.colour]) {
      throw std::logic_error("greedy_m0 produced an invalid matching");
    }
    va[e.a] = vb[e.b] = vc[e.colour] = 1;
  }
  result.ok = true;
  return result;
}

M3Result finish_m3(const ColouredBipartiteGraph& g1, const Subpair& trimmed,
                   const std::vector<char>& m2_colours, const RainbowMatching& m0,
                   double d, int a1_size, const PipelineParams& params) {
  M3Result result;
  std::vector<char> skip = m2_colours;
  std::vector<char> used_a(g1.size_a(), 0), used_b(g1.size_b(), 0);
  for (const ColouredEdge& e : m0.edges) {
    skip[e.colour] = 1;
    used_a[e.a] = 1;
    used_b[e.b] = 1;
  }
  for (int v : trimmed.a) {
    if (!used_a[v]) result.final_core.a.push_back(v);
  }
  for (int v : trimmed.b) {
    if (!used_b[v]) result.final_core.b.push_back(v);
  }

  double required = params.min_deg_coef * d * a1_size / 2.0;
  if (params.scaled) required = std::max(required, 1.0);
  result.required_min_degree = required;

  InducedPair local = induce(g1, result.final_core, &skip);
  int min_deg = local.graph.n_a == 0 ? 0 : local.graph.n_b;
  for (const auto& row : local.graph.adj) min_deg = std::min(min_deg, static_cast<int>(row.size()));
  BipartiteGraph t = local.graph.transposed();
  for (const auto& row : t.adj) min_deg = std::min(min_deg, static_cast<int>(row.size()));
  result.entry_min_degree = min_deg;

  if (result.final_core.size_a() != result.final_core.size_b()) {
    return result;  // caller reports; balanced by construction
  }
  Matching matched = max_matching(local.graph);
  if (matched.size != result.final_core.size_a()) {
    auto violator = hall_violator(local.graph, Side::A);
    if (violator) {
      for (int v : *violator) result.hall_violator_set.push_back(local.map_a[v]);
    }
    return result;
  }
  for (int i = 0; i < local.graph.n_a; ++i) {
    const int a = local.map_a[i];
    const int b = local.map_b[matched.match_a[i]];
    const auto id = g1.find_edge(a, b);
    result.m3.edges.push_back(g1.edge(*id));
  }
  if (!is_rainbow_matching(g1, result.m3) ||
      result.m3.size() != result.final_core.size_a()) {
    throw std::logic_error("finish_m3 produced an invalid matching");
  }
  result.ok = true;
  return result;
}

namespace {

void record(std::vector<StageRecord>& trace, StageRecord record_value) {
  trace.push_back(std::move(record_value));
}

PipelineResult fail_stage(PipelineResult result, FailureReport report) {
  result.failure = std::move(report);
  result.success = false;
  return result;
}

}  // namespace

PipelineResult solve_pipeline(const LatinArray& array, const PipelineParams& params,
                              std::uint64_t seed) {
  PipelineResult result;
  ValidationReport valid = validate_latin(array);
  if (!valid.ok()) {
    return fail_stage(std::move(result),
                      {"validate", "input is not a Latin array: " + valid.violations.front().reason,
                       "", 0.0});
  }
  const int n = array.n;
  const int k = array.k;
  const double d = static_cast<double>(k) / (static_cast<double>(n) * n);
  if (k < n) {
    return fail_stage(std::move(result),
                      {"hypothesis", "a rainbow perfect matching needs at least n colours",
                       "k >= n", static_cast<double>(k - n)});
  }

  const ColouredBipartiteGraph full = to_graph(array);
  if (n == 1) {
    result.matching.edges.push_back(full.edge(0));
    result.success = verify_rainbow_perfect(full, result.matching);
    return result;
  }

  const ColouredBipartiteGraph g1 = one_edge_per_colour(full, mix_seed(seed, 11));
  record(result.trace, {"one-edge-per-colour",
                        true,
                        {{"edges", g1.edge_count()},
                         {"k", k},
                         {"d", d},
                         {"d_min", params.d_min(n)},
                         {"admissible", d > params.d_min(n) ? 1 : 0}},
                        ""});

  DenseCheckOptions dopts;
  dopts.seed = mix_seed(seed, 12);
  DenseSubpairResult dense = dense_subpair(g1, params.density, d, dopts);
  record(result.trace, {"dense-subpair",
                        dense.ok,
                        {{"size", dense.pair.size_a()},
                         {"density", dense.pair_density},
                         {"iterations", dense.iterations},
                         {"growth_shortfalls", dense.growth_shortfalls},
                         {"size_floor", dense.size_floor},
                         {"exact", dense.exact ? 1 : 0}},
                        dense.error});
  if (!dense.ok) {
    return fail_stage(std::move(result),
                      {"dense-subpair", dense.error, "|A'| >= d^sigma n/2",
                       dense.pair.size_a() - dense.size_floor});
  }

  PruneOptions popts;
  popts.scaled = params.scaled;
  popts.seed = mix_seed(seed, 13);
  RobustPairResult robust =
      prune_to_robust(g1, dense.pair, d, params.min_deg_coef, params.density, popts);
  record(result.trace, {"prune-to-robust",
                        robust.ok,
                        {{"size", robust.robust.pair.size_a()},
                         {"min_degree", robust.robust.min_degree},
                         {"tau", robust.robust.degree_threshold},
                         {"deleted_per_side", robust.deleted_per_side},
                         {"expansion_cap", robust.robust.expansion.cap},
                         {"type2_exact", robust.type2_exact ? 1 : 0}},
                        robust.error});
  if (!robust.ok) {
    return fail_stage(std::move(result),
                      {"prune-to-robust", robust.error, "deletions < 2 epsilon |A'|",
                       static_cast<double>(robust.deleted_per_side)});
  }
  const Subpair& core = robust.robust.pair;
  const int a1 = core.size_a();
  result.state.core = core;

  const double p = params.reserve_p(n);
  ReservationSplit split = reserve_colours(full, core, p, mix_seed(seed, 14));
  record(result.trace,
         {"reserve-colours",
          true,
          {{"p", p},
           {"reserved", split.stats.reserved_colours},
           {"expected", split.stats.expected_reserved},
           {"outside_band_b", split.stats.outside_b},
           {"outside_band_a", split.stats.outside_a},
           {"band_low", split.stats.band_low},
           {"band_high", split.stats.band_high}},
          ""});

  AugmentStats austats;
  RainbowMatching m2 =
      augmenting_rainbow(split.g_star, mix_seed(seed, 15), params, a1, &austats);
  result.state.m2 = m2;
  for (const ColouredEdge& e : m2.edges) {
    result.state.matched.a.push_back(e.a);
    result.state.matched.b.push_back(e.b);
  }
  std::sort(result.state.matched.a.begin(), result.state.matched.a.end());
  std::sort(result.state.matched.b.begin(), result.state.matched.b.end());
  record(result.trace, {"m2-augmenting-rainbow",
                        true,
                        {{"size", m2.size()},
                         {"greedy", austats.greedy_size},
                         {"augmentations", austats.augmentations},
                         {"trace_failures", austats.trace_failures},
                         {"gstar_min_degree", austats.min_degree},
                         {"benchmark", austats.benchmark},
                         {"benchmark_met", austats.benchmark_met ? 1 : 0}},
                        ""});

  const std::vector<char> m2_cols = colour_mask(m2, full.colour_bound());
  TrimResult trim = trim_core(g1, core, m2_cols, d, params);
  result.state.trimmed = trim.trimmed;
  const double over_bound = 1e4 * n / std::max(d * a1, 1e-9);
  record(result.trace, {"trim-core",
                        trim.ok,
                        {{"size", trim.trimmed.size_a()},
                         {"min_degree", trim.actual_min_degree},
                         {"required", trim.required_min_degree},
                         {"loss_threshold", trim.loss_threshold},
                         {"over_threshold_a", trim.over_threshold_a},
                         {"over_threshold_b", trim.over_threshold_b},
                         {"over_threshold_bound", over_bound}},
                        trim.note});

  // A0 = A \ (A'1 u A2), and symmetrically for B0.
  Subpair leftovers;
  {
    std::vector<char> taken_a = mask_of(trim.trimmed.a, n);
    std::vector<char> taken_b = mask_of(trim.trimmed.b, n);
    for (const ColouredEdge& e : m2.edges) {
      taken_a[e.a] = 1;
      taken_b[e.b] = 1;
    }
    for (int v = 0; v < n; ++v) {
      if (!taken_a[v]) leftovers.a.push_back(v);
    }
    for (int v = 0; v < n; ++v) {
      if (!taken_b[v]) leftovers.b.push_back(v);
    }
  }
  result.state.leftovers = leftovers;
  if (leftovers.size_a() != leftovers.size_b()) {
    throw std::logic_error("leftover sets out of balance");
  }
  const double a0_bound = 2.0 * params.trim_coef * d * a1;
  record(result.trace, {"leftovers",
                        true,
                        {{"a0", leftovers.size_a()},
                         {"b0", leftovers.size_b()},
                         {"asymptotic_bound", a0_bound},
                         {"within_bound", leftovers.size_a() < a0_bound ? 1 : 0}},
                        ""});

  HardLeftovers hard =
      classify_hard_leftovers(array, leftovers, trim.trimmed, m2_cols, p, a1);
  result.state.hard = hard.hard;
  record(result.trace, {"hard-leftovers",
                        true,
                        {{"a0_hard", hard.hard.size_a()},
                         {"b0_hard", hard.hard.size_b()},
                         {"bound", hard.bound},
                         {"within_bound", hard.bound_ok ? 1 : 0}},
                        ""});

  M0Result m0 = greedy_m0(array, split.reserved, leftovers, hard, trim.trimmed, m2_cols,
                          mix_seed(seed, 16));
  record(result.trace, {"greedy-m0",
                        m0.ok,
                        {{"size", m0.m0.size()},
                         {"expected", leftovers.size_a() + leftovers.size_b()}},
                        m0.ok ? "" : m0.failure->message});
  if (!m0.ok) {
    return fail_stage(std::move(result), *m0.failure);
  }
  result.state.m0 = m0.m0;

  M3Result m3 = finish_m3(g1, trim.trimmed, m2_cols, m0.m0, d, a1, params);
  result.state.m3 = m3.m3;
  result.state.final_core = m3.final_core;
  record(result.trace, {"finish-m3",
                        m3.ok,
                        {{"a3", m3.final_core.size_a()},
                         {"b3", m3.final_core.size_b()},
                         {"expected", trim.trimmed.size_a() - leftovers.size_a()},
                         {"entry_min_degree", m3.entry_min_degree},
                         {"required", m3.required_min_degree},
                         {"size", m3.m3.size()}},
                        m3.ok ? "" : "G3 has no perfect matching"});
  if (!m3.ok) {
    return fail_stage(
        std::move(result),
        {"finish-m3",
         "G3 has no perfect matching; Hall violator of size " +
             std::to_string(m3.hall_violator_set.size()),
         "|N(S)| >= |S| for all S",
         static_cast<double>(m3.final_core.size_a() - m3.m3.size())});
  }

  RainbowMatching assembled;
  assembled.edges = m2.edges;
  assembled.edges.insert(assembled.edges.end(), m0.m0.edges.begin(), m0.m0.edges.end());
  assembled.edges.insert(assembled.edges.end(), m3.m3.edges.begin(), m3.m3.edges.end());
  std::sort(assembled.edges.begin(), assembled.edges.end(),
            [](const ColouredEdge& x, const ColouredEdge& y) { return x.a < y.a; });
  const bool verified = verify_rainbow_perfect(full, assembled);
  record(result.trace,
         {"assemble", verified, {{"size", assembled.size()}, {"verified", verified ? 1 : 0}}, ""});
  if (!verified) {
    throw std::logic_error("assembled matching failed verification");
  }
  result.success = true;
  result.matching = std::move(assembled);
  return result;
}

AutoResult solve_auto(const LatinArray& array, std::uint64_t seed,
                      const PipelineParams& params) {
  ValidationReport valid = validate_latin(array);
  if (!valid.ok()) {
    throw std::invalid_argument("solve_auto requires a valid Latin array: " +
                                valid.violations.front().reason);
  }
  AutoResult result;
  if (array.n <= 9) {
    auto found = find_transversal_exact(array);
    result.method = "oracle";
    if (found) {
      result.matching = std::move(*found);
    } else {
      result.exact_none = true;
    }
    return result;
  }

  PipelineResult pipe = solve_pipeline(array, params, seed);
  if (pipe.success) {
    result.method = "pipeline";
    result.matching = std::move(pipe.matching);
    return result;
  }

  const ColouredBipartiteGraph full = to_graph(array);
  for (int attempt = 0; attempt < 8; ++attempt) {
    const ColouredBipartiteGraph g =
        one_edge_per_colour(full, mix_seed(seed, 100 + attempt));
    RainbowMatching m =
        augmenting_rainbow(g, mix_seed(seed, 200 + attempt), params, -1, nullptr);
    if (m.size() == array.n && verify_rainbow_perfect(full, m)) {
      result.method = "augmenting";
      result.matching = std::move(m);
      return result;
    }
  }
  result.method = "none";
  return result;
}

}  // namespace rainbow
