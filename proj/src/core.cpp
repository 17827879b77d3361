#include "rainbow/core.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "rainbow/rng.hpp"

namespace rainbow {

ValidationReport validate_latin(const LatinArray& array) {
  ValidationReport report;
  if (array.n <= 0) {
    report.violations.push_back({-1, -1, -1, "order must be positive"});
    return report;
  }
  if (array.k <= 0) {
    report.violations.push_back({-1, -1, -1, "colour count must be positive"});
    return report;
  }
  const std::size_t cells = static_cast<std::size_t>(array.n) * array.n;
  if (array.grid.size() != cells) {
    report.violations.push_back({-1, -1, -1, "grid is not n by n"});
    return report;
  }
  const int n = array.n;
  std::vector<char> used(array.k, 0);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const int colour = array.at(r, c);
      if (colour < 0 || colour >= array.k) {
        report.violations.push_back({r, c, colour, "colour id out of range"});
      } else {
        used[colour] = 1;
      }
    }
  }
  if (!report.ok()) return report;  // range errors make the scans below unsafe

  std::vector<int> seen(array.k, -1);
  for (int r = 0; r < n; ++r) {
    std::fill(seen.begin(), seen.end(), -1);
    for (int c = 0; c < n; ++c) {
      const int colour = array.at(r, c);
      if (seen[colour] >= 0) {
        report.violations.push_back({r, c, colour, "colour repeated in row"});
      }
      seen[colour] = c;
    }
  }
  for (int c = 0; c < n; ++c) {
    std::fill(seen.begin(), seen.end(), -1);
    for (int r = 0; r < n; ++r) {
      const int colour = array.at(r, c);
      if (seen[colour] >= 0) {
        report.violations.push_back({r, c, colour, "colour repeated in column"});
      }
      seen[colour] = r;
    }
  }
  for (int colour = 0; colour < array.k; ++colour) {
    if (!used[colour]) {
      report.violations.push_back({-1, -1, colour, "colour id never used"});
    }
  }
  return report;
}

ColouredBipartiteGraph::ColouredBipartiteGraph(int size_a, int size_b, int colour_bound,
                                               std::vector<ColouredEdge> edges)
    : size_a_(size_a), size_b_(size_b), colour_bound_(colour_bound), edges_(std::move(edges)) {
  if (size_a_ < 0 || size_b_ < 0 || colour_bound_ < 0) {
    throw std::invalid_argument("graph dimensions must be nonnegative");
  }
  for (const ColouredEdge& e : edges_) {
    if (e.a < 0 || e.a >= size_a_ || e.b < 0 || e.b >= size_b_) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    if (e.colour < 0 || e.colour >= colour_bound_) {
      throw std::invalid_argument("edge colour out of range");
    }
  }
  auto by_cell = [](const ColouredEdge& x, const ColouredEdge& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  };
  if (!std::is_sorted(edges_.begin(), edges_.end(), by_cell)) {
    std::sort(edges_.begin(), edges_.end(), by_cell);
  }
  const int m = static_cast<int>(edges_.size());
  for (int i = 1; i < m; ++i) {
    if (edges_[i].a == edges_[i - 1].a && edges_[i].b == edges_[i - 1].b) {
      throw std::invalid_argument("parallel edge");
    }
  }

  a_off_.assign(size_a_ + 1, 0);
  b_off_.assign(size_b_ + 1, 0);
  c_off_.assign(colour_bound_ + 1, 0);
  for (const ColouredEdge& e : edges_) {
    ++a_off_[e.a + 1];
    ++b_off_[e.b + 1];
    ++c_off_[e.colour + 1];
  }
  for (int i = 0; i < size_a_; ++i) a_off_[i + 1] += a_off_[i];
  for (int i = 0; i < size_b_; ++i) b_off_[i + 1] += b_off_[i];
  for (int i = 0; i < colour_bound_; ++i) c_off_[i + 1] += c_off_[i];

  a_idx_.resize(m);
  b_idx_.resize(m);
  c_idx_.resize(m);
  std::vector<int> cur_a(a_off_.begin(), a_off_.end() - 1);
  std::vector<int> cur_b(b_off_.begin(), b_off_.end() - 1);
  std::vector<int> cur_c(c_off_.begin(), c_off_.end() - 1);
  for (int id = 0; id < m; ++id) {
    const ColouredEdge& e = edges_[id];
    a_idx_[cur_a[e.a]++] = id;  // (a,b)-sorted input keeps these sorted by b
    b_idx_[cur_b[e.b]++] = id;
    c_idx_[cur_c[e.colour]++] = id;
  }

  // Properness: a colour class may not touch a vertex twice. Classes are in
  // (a, b) order, so repeated a's are adjacent; b's need a stamp.
  std::vector<int> b_stamp(size_b_, -1);
  distinct_colours_ = 0;
  for (int colour = 0; colour < colour_bound_; ++colour) {
    const int lo = c_off_[colour], hi = c_off_[colour + 1];
    if (lo == hi) continue;
    ++distinct_colours_;
    for (int i = lo; i < hi; ++i) {
      const ColouredEdge& e = edges_[c_idx_[i]];
      if (i > lo && e.a == edges_[c_idx_[i - 1]].a) {
        throw std::invalid_argument("improper colouring: colour repeated at a row vertex");
      }
      if (b_stamp[e.b] == colour) {
        throw std::invalid_argument("improper colouring: colour repeated at a column vertex");
      }
      b_stamp[e.b] = colour;
    }
  }
}

std::span<const int> ColouredBipartiteGraph::edges_at_a(int a) const {
  return {a_idx_.data() + a_off_[a], static_cast<std::size_t>(a_off_[a + 1] - a_off_[a])};
}

std::span<const int> ColouredBipartiteGraph::edges_at_b(int b) const {
  return {b_idx_.data() + b_off_[b], static_cast<std::size_t>(b_off_[b + 1] - b_off_[b])};
}

std::span<const int> ColouredBipartiteGraph::colour_class(int colour) const {
  return {c_idx_.data() + c_off_[colour], static_cast<std::size_t>(c_off_[colour + 1] - c_off_[colour])};
}

std::optional<int> ColouredBipartiteGraph::find_edge(int a, int b) const {
  if (a < 0 || a >= size_a_ || b < 0 || b >= size_b_) return std::nullopt;
  auto span = edges_at_a(a);
  int lo = 0, hi = static_cast<int>(span.size());
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (edges_[span[mid]].b < b) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < static_cast<int>(span.size()) && edges_[span[lo]].b == b) return span[lo];
  return std::nullopt;
}

ColouredBipartiteGraph to_graph(const LatinArray& array) {
  ValidationReport report = validate_latin(array);
  if (!report.ok()) {
    throw std::invalid_argument("invalid Latin array: " + report.violations.front().reason);
  }
  std::vector<ColouredEdge> edges;
  edges.reserve(static_cast<std::size_t>(array.n) * array.n);
  for (int r = 0; r < array.n; ++r) {
    for (int c = 0; c < array.n; ++c) {
      edges.push_back({r, c, array.at(r, c)});
    }
  }
  return {array.n, array.n, array.k, std::move(edges)};
}

ColouredBipartiteGraph one_edge_per_colour(const ColouredBipartiteGraph& graph,
                                           std::uint64_t seed) {
  std::vector<ColouredEdge> picked;
  picked.reserve(graph.distinct_colours());
  for (int colour = 0; colour < graph.colour_bound(); ++colour) {
    auto cls = graph.colour_class(colour);
    if (cls.empty()) continue;
    const ColouredEdge& least = graph.edge(cls.front());
    const std::uint64_t key =
        static_cast<std::uint64_t>(least.a) * graph.size_b() + least.b;
    const std::uint64_t h = mix_seed(seed, key);
    picked.push_back(graph.edge(cls[h % cls.size()]));
  }
  return {graph.size_a(), graph.size_b(), graph.colour_bound(), std::move(picked)};
}

bool is_rainbow_matching(const ColouredBipartiteGraph& graph, const RainbowMatching& m) {
  std::vector<char> used_a(graph.size_a(), 0), used_b(graph.size_b(), 0);
  std::vector<char> used_colour(graph.colour_bound(), 0);
  for (const ColouredEdge& e : m.edges) {
    if (e.a < 0 || e.a >= graph.size_a() || e.b < 0 || e.b >= graph.size_b()) return false;
    if (e.colour < 0 || e.colour >= graph.colour_bound()) return false;
    auto id = graph.find_edge(e.a, e.b);
    if (!id || graph.edge(*id).colour != e.colour) return false;
    if (used_a[e.a] || used_b[e.b] || used_colour[e.colour]) return false;
    used_a[e.a] = used_b[e.b] = used_colour[e.colour] = 1;
  }
  return true;
}

bool verify_rainbow_perfect(const ColouredBipartiteGraph& graph, const RainbowMatching& m) {
  if (m.size() != graph.size_a() || graph.size_a() != graph.size_b()) return false;
  return is_rainbow_matching(graph, m);
}

Subpair make_subpair(std::vector<int> a, std::vector<int> b, int size_a, int size_b) {
  auto canon = [](std::vector<int>& v, int bound, const char* side) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (!v.empty() && (v.front() < 0 || v.back() >= bound)) {
      throw std::invalid_argument(std::string("subpair index out of range on side ") + side);
    }
  };
  canon(a, size_a, "A");
  canon(b, size_b, "B");
  return {std::move(a), std::move(b)};
}

LatinArray parse_latin(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("missing header line");
  std::istringstream head(header);
  LatinArray array;
  if (!(head >> array.n >> array.k)) throw std::invalid_argument("malformed header, expected \"n k\"");
  std::string extra;
  if (head >> extra) throw std::invalid_argument("malformed header, trailing tokens");
  if (array.n <= 0 || array.k <= 0) throw std::invalid_argument("header values must be positive");

  array.grid.resize(static_cast<std::size_t>(array.n) * array.n);
  std::string line;
  for (int r = 0; r < array.n; ++r) {
    if (!std::getline(in, line)) throw std::invalid_argument("missing row " + std::to_string(r));
    std::istringstream row(line);
    for (int c = 0; c < array.n; ++c) {
      int colour;
      if (!(row >> colour)) throw std::invalid_argument("ragged row " + std::to_string(r));
      if (colour < 0 || colour >= array.k) {
        throw std::invalid_argument("colour id out of range at row " + std::to_string(r));
      }
      array.at(r, c) = colour;
    }
    if (row >> extra) throw std::invalid_argument("ragged row " + std::to_string(r) + ": extra tokens");
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) {
      throw std::invalid_argument("trailing content after grid");
    }
  }
  return array;
}

std::string serialize_latin(const LatinArray& array) {
  std::ostringstream out;
  out << array.n << ' ' << array.k << '\n';
  for (int r = 0; r < array.n; ++r) {
    for (int c = 0; c < array.n; ++c) {
      if (c) out << ' ';
      out << array.at(r, c);
    }
    out << '\n';
  }
  return out.str();
}

std::string serialize_matching(const RainbowMatching& m, bool rainbow_perfect) {
  nlohmann::json records = nlohmann::json::array();
  for (const ColouredEdge& e : m.edges) {
    records.push_back({{"row", e.a}, {"col", e.b}, {"colour", e.colour}});
  }
  std::string out = records.dump();
  out += "\nRAINBOW-PERFECT: ";
  out += rainbow_perfect ? "yes" : "no";
  out += '\n';
  return out;
}

RainbowMatching parse_matching(std::string_view text) {
  const std::size_t eol = text.find('\n');
  const std::string_view first = text.substr(0, eol);
  nlohmann::json records;
  try {
    records = nlohmann::json::parse(first);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed matching record line: ") + e.what());
  }
  if (!records.is_array()) throw std::invalid_argument("matching records must be a JSON array");
  RainbowMatching m;
  for (const auto& rec : records) {
    m.edges.push_back({rec.at("row").get<int>(), rec.at("col").get<int>(),
                       rec.at("colour").get<int>()});
  }
  return m;
}

}  // namespace rainbow
