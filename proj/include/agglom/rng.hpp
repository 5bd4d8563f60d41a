#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace agglom {

// Deterministic random source. All draws go through explicit helpers built on
// the raw mt19937_64 output stream, which is fixed by the standard; we never
// use std::*_distribution or std::shuffle, whose sequences vary across
// standard libraries. Replays therefore reproduce bit-for-bit.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, n). Modulo bias is irrelevant for the n used here
  // (all far below 2^32).
  std::size_t bounded(std::size_t n) { return static_cast<std::size_t>(next() % n); }

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; spare value cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    double u2 = uniform();
    double mag = std::sqrt(-2.0 * std::log(u1));
    double ang = 6.283185307179586476925286766559 * u2;
    spare_ = mag * std::sin(ang);
    have_spare_ = true;
    return mag * std::cos(ang);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = bounded(i);
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stage seeds derive from one master seed so stages can be re-run in
// isolation: seed = splitmix64(master ^ fnv1a(stage) ^ mix(a) ^ mix(b)).
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                          std::uint64_t a = 0, std::uint64_t b = 0);

std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(std::string_view s);

}  // namespace agglom
