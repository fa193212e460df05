#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mbb/normal.hpp"

namespace mbb {

// Deterministic random source. All distributions are derived from raw
// mt19937_64 output by hand so that a seed pins the byte-identical stream on
// every standard library (std::*_distribution is implementation-defined).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in (0, 1), safe for log/quantile transforms.
  double uniform_open() {
    double u;
    do { u = uniform(); } while (u <= 0.0);
    return u;
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

  double gaussian() { return normal_quantile(uniform_open()); }

  double exponential() { return -std::log(uniform_open()); }

  // Dirichlet(1,...,1) by normalized exponentials; entries strictly positive.
  std::vector<double> dirichlet(std::size_t n) {
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& x : w) { x = exponential() + 1e-9; s += x; }
    for (auto& x : w) x /= s;
    return w;
  }

private:
  std::mt19937_64 gen_;
};

} // namespace mbb
