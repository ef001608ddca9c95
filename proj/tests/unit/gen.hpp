#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>

namespace gen {

/// Seeded sample source for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int integer(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }
  /// Log-uniform magnitude in [lo, hi] with a random sign.
  double signed_log(double lo, double hi) {
    const double m = std::exp(uniform(std::log(lo), std::log(hi)));
    return uniform(0.0, 1.0) < 0.5 ? -m : m;
  }
  Eigen::VectorXd vec(int n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Runs `prop` on `count` draws; the draw index is passed for diagnostics.
inline void for_all(int count, std::uint64_t seed,
                    const std::function<void(Gen&, int)>& prop) {
  Gen g(seed);
  for (int i = 0; i < count; ++i) prop(g, i);
}

}  // namespace gen
