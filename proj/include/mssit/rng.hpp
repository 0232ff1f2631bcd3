#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace mssit {

// Deterministic random stream. All distributions are derived from the raw
// mt19937_64 output here rather than through std:: distribution objects, so a
// given seed produces the same sequence under any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_mix_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    // Rejection-free modulo bias is negligible for the n used here, but stay
    // exact anyway.
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
  }

  // Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Normal(0, sigma) truncated to +/- 2 sigma, the usual transformer init.
  double truncated_normal(double sigma) {
    double v = normal();
    while (std::abs(v) > 2.0) v = normal();
    return v * sigma;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Independent child stream, e.g. one per sample.
  Rng derive(std::uint64_t stream) const {
    std::uint64_t s = seed_mix_;
    s ^= stream + 0x9e3779b97f4a7c15ull + (s << 6) + (s >> 2);
    return Rng(s);
  }

  void reseed(std::uint64_t seed) {
    engine_.seed(seed);
    seed_mix_ = seed;
    has_spare_ = false;
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_mix_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mssit
