#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ndsts {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic RNG with explicit sub-streams. std::mt19937_64 output is
/// pinned by the standard; the derived draws below avoid std distributions,
/// whose sequences vary across library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t s = seed ^ (stream * 0x9e3779b97f4a7c15ULL);
    eng_.seed(splitmix64(s));
  }

  std::uint64_t next() { return eng_(); }

  /// Uniform in [0, n). Modulo bias is < n / 2^64, irrelevant for small n.
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  double normal() {
    // Box-Muller; deterministic given the engine.
    double u1 = unit(), u2 = unit();
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[index(v.size())];
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ndsts
