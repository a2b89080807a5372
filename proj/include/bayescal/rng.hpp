#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bayescal {

// Deterministic random source. Every randomized routine in the library draws
// from this class only, so results for a fixed seed do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, bound), bound >= 1.
  std::uint64_t below(std::uint64_t bound);

  // Standard normal via Box-Muller. Consumes exactly two uniforms per call.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Gamma(shape, 1) for shape > 0, Marsaglia-Tsang squeeze method.
  double gamma(double shape);

  // Beta(a, b) as the usual ratio of two gammas.
  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 gen_;
};

}  // namespace bayescal
