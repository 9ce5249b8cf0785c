#ifndef SVGOF_RNG_HPP
#define SVGOF_RNG_HPP

// Deterministic random number generation.
//
// The generator is xoshiro256++ seeded through SplitMix64. Independent
// streams are derived from (seed, stream index) with the SplitMix64
// finalizer, so replicate k of a Monte Carlo run always sees the same
// numbers no matter how work is scheduled across threads. The algorithm
// name below is written into every run manifest; changing the generator
// means bumping the version string.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace svgof {

inline constexpr const char* kRngAlgorithm = "xoshiro256++/splitmix64-streams/v1";

namespace detail {

// SplitMix64 finalizer (Vigna / Steele et al.), also used as a mixer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) {
      s += 0x9E3779B97F4A7C15ull;
      w = detail::mix64(s);
    }
  }

  // Stream `index` of a master seed. Used for replicate / chain /
  // bootstrap-resample substreams.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(detail::mix64(seed + detail::mix64(index + 1)));
  }

  std::uint64_t next_u64() {
    std::uint64_t* s = state_.data();
    const std::uint64_t result = detail::rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = detail::rotl(s[3], 45);
    return result;
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal via the trigonometric Box-Muller transform.
  // Consumes exactly two uniforms per draw; no state is cached so the
  // stream position is a pure function of the number of draws.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled by boosting.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform_pos(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
        return d * v;
      }
    }
  }

  // Inverse-gamma draw with the (shape, scale) convention IG(a, b):
  // density ∝ x^{-a-1} exp(-b/x).
  double inverse_gamma(double shape, double scale) {
    return scale / gamma(shape);
  }

 private:
  std::array<std::uint64_t, 4> state_;
};

// Replicate-seed derivation used by all Monte Carlo harnesses.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return detail::mix64(seed + detail::mix64(index + 1));
}

}  // namespace svgof

#endif  // SVGOF_RNG_HPP
