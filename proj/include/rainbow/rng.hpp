#pragma once

#include <cstdint>

namespace rainbow {

// splitmix64 finalizer. Every seeded choice in the library goes through this
// mixer so that results are identical across platforms and standard library
// implementations (std:: distributions are not portable).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stable derivation of a child seed from (seed, salt).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(seed ^ splitmix64(salt ^ 0xd1b54a32d192ed03ULL));
}

// Counter-based splitmix64 stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform value in [0, bound); bound 0/1 returns 0. Modulo bias is
  // negligible for the bounds used here and keeps the stream portable.
  int below(int bound) {
    if (bound <= 1) return 0;
    return static_cast<int>(next() % static_cast<std::uint64_t>(bound));
  }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace rainbow
