#include "rainbow/generators.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

#include "rainbow/rng.hpp"

namespace rainbow {

LatinArray cyclic_latin(int n) {
  if (n < 1) throw std::invalid_argument("order must be at least 1");
  LatinArray array;
  array.n = n;
  array.k = n;
  array.grid.resize(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) array.at(r, c) = (r + c) % n;
  }
  return array;
}

LatinArray z2k_table(int k_half) {
  if (k_half < 1) throw std::invalid_argument("k_half must be at least 1");
  return cyclic_latin(2 * k_half);
}

LatinArray random_latin(int n, std::uint64_t seed, std::int64_t mixing_steps) {
  LatinArray array = cyclic_latin(n);
  if (n < 2 || mixing_steps <= 0) return array;

  // Incidence views of the square: xy[r][c] = symbol, xz[r][s] = column of
  // symbol s in row r, yz[c][s] = row of symbol s in column c.
  auto& xy = array.grid;
  std::vector<int> xz(static_cast<std::size_t>(n) * n), yz(xz.size());
  auto XY = [&](int i, int j) -> int& { return xy[static_cast<std::size_t>(i) * n + j]; };
  auto XZ = [&](int i, int k) -> int& { return xz[static_cast<std::size_t>(i) * n + k]; };
  auto YZ = [&](int j, int k) -> int& { return yz[static_cast<std::size_t>(j) * n + k]; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int k = XY(i, j);
      XZ(i, k) = j;
      YZ(j, k) = i;
    }
  }

  Rng rng(seed);
  auto rand_exch = [&](int a_in, int b_in, int& a, int& b) {
    if (rng.below(2) == 0) {
      a = a_in;
      b = b_in;
    } else {
      a = b_in;
      b = a_in;
    }
  };

  // Each +-1 cube flip counts as one move; after the budget is spent the
  // current improper walk is finished so the result is always a Latin square.
  bool proper = true;
  int mi = 0, mj = 0, mk = 0;  // the improper cell (holds symbol mk twice conceptually)
  int mxy = 0, mxz = 0, myz = 0;
  std::int64_t done = 0;
  while (done < mixing_steps || !proper) {
    int i, j, k, i2, j2, k2, i2_, j2_, k2_;
    if (proper) {
      do {
        i = rng.below(n);
        j = rng.below(n);
        k = rng.below(n);
      } while (XY(i, j) == k);
      i2 = YZ(j, k);
      j2 = XZ(i, k);
      k2 = XY(i, j);
      i2_ = i;
      j2_ = j;
      k2_ = k;
    } else {
      i = mi;
      j = mj;
      k = mk;
      rand_exch(YZ(j, k), myz, i2, i2_);
      rand_exch(XZ(i, k), mxz, j2, j2_);
      rand_exch(XY(i, j), mxy, k2, k2_);
    }

    proper = XY(i2, j2) == k2;
    if (!proper) {
      mi = i2;
      mj = j2;
      mk = k2;
      mxy = XY(i2, j2);
      myz = YZ(j2, k2);
      mxz = XZ(i2, k2);
    }

    XY(i, j) = k2_;
    XY(i, j2) = k2;
    XY(i2, j) = k2;
    XY(i2, j2) = k;
    YZ(j, k) = i2_;
    YZ(j, k2) = i2;
    YZ(j2, k) = i2;
    YZ(j2, k2) = i;
    XZ(i, k) = j2_;
    XZ(i, k2) = j2;
    XZ(i2, k) = j2;
    XZ(i2, k2) = j;

    ++done;
  }
  return array;
}

LatinArray split_colours(const LatinArray& array, int target_colours, std::uint64_t seed) {
  const int n = array.n;
  if (target_colours < array.k || target_colours < n ||
      static_cast<std::int64_t>(target_colours) > static_cast<std::int64_t>(n) * n) {
    throw std::invalid_argument("target colour count out of range");
  }
  ValidationReport report = validate_latin(array);
  if (!report.ok()) throw std::invalid_argument("split_colours requires a valid array");

  LatinArray out = array;
  // Cell lists per colour, kept sorted so seeded uniform picks are stable.
  std::vector<std::vector<int>> cells(target_colours);
  for (int pos = 0; pos < n * n; ++pos) cells[out.grid[pos]].push_back(pos);

  // Max-heap on (class size, -colour id), refreshed lazily.
  using Entry = std::pair<int, int>;  // (size, -colour)
  std::priority_queue<Entry> heap;
  for (int colour = 0; colour < array.k; ++colour) {
    heap.push({static_cast<int>(cells[colour].size()), -colour});
  }

  Rng rng(seed);
  for (int fresh = array.k; fresh < target_colours; ++fresh) {
    int colour = -1;
    while (!heap.empty()) {
      auto [size, neg] = heap.top();
      const int cand = -neg;
      if (static_cast<int>(cells[cand].size()) != size) {
        heap.pop();  // stale
        continue;
      }
      if (size < 2) throw std::logic_error("no splittable colour class left");
      colour = cand;
      break;
    }
    if (colour < 0) throw std::logic_error("no splittable colour class left");

    auto& cls = cells[colour];
    const int pick = rng.below(static_cast<int>(cls.size()));
    const int pos = cls[pick];
    cls.erase(cls.begin() + pick);
    heap.push({static_cast<int>(cls.size()), -colour});

    out.grid[pos] = fresh;
    cells[fresh].push_back(pos);
    heap.push({1, -fresh});
  }
  out.k = target_colours;
  return out;
}

LatinArray generate(const GenSpec& spec) {
  const std::int64_t mixing =
      spec.mixing_steps >= 0 ? spec.mixing_steps
                             : static_cast<std::int64_t>(spec.n) * spec.n * spec.n;
  LatinArray base;
  switch (spec.family) {
    case GenSpec::Family::Cyclic:
      base = cyclic_latin(spec.n);
      break;
    case GenSpec::Family::Z2k:
      if (spec.n % 2 != 0) throw std::invalid_argument("z2k family needs even order");
      base = z2k_table(spec.n / 2);
      break;
    case GenSpec::Family::RandomLatin:
    case GenSpec::Family::Split:
      base = random_latin(spec.n, spec.seed, mixing);
      break;
  }
  if (spec.target_colours >= 0 && spec.target_colours != base.k) {
    base = split_colours(base, spec.target_colours, mix_seed(spec.seed, 0x51157ULL));
  }
  return base;
}

}  // namespace rainbow
