#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace urank {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for cell (n, rep) of a study grid.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t n, std::uint64_t rep) noexcept {
  return base ^ mix64(mix64(n + 0x632be59bd9b4e019ULL) + rep);
}

/// Counter-based 64-bit generator: the k-th output is mix64(seed + (k+1)·γ)
/// with γ the golden-ratio increment, so the stream is a pure function of
/// (seed, k). Satisfies UniformRandomBitGenerator.
///
/// Variates are produced by hand (53-bit uniforms, Box-Muller normals)
/// rather than through <random> distributions, whose algorithms are
/// implementation-defined; this keeps samples bit-identical across
/// standard libraries.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(seed_ + counter_ * kGamma);
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Fair ±1 sign.
  int rademacher() noexcept { return ((*this)() >> 63) != 0 ? 1 : -1; }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace urank
