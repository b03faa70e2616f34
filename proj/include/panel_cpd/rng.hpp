#pragma once

// Reproducible random streams.
//
// Every random quantity in the library is drawn from a Xoshiro256** engine
// whose state is derived from a 64-bit master seed plus a tuple of stream
// identifiers (replication index, row index, ...) through SplitMix64. A
// stream therefore depends only on its identifiers, never on which worker
// thread consumes it or in which order.
//
// Gaussian and Student-t variates are generated here rather than through
// <random> distributions so the numbers are identical across standard
// library implementations.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>

namespace panel_cpd::rng {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Hash a master seed and a list of stream ids into one derived seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> ids) noexcept {
  std::uint64_t state = seed;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t id : ids) {
    state ^= id + 0x632BE59BD9B4E019ULL + (out << 6) + (out >> 2);
    out = splitmix64(state);
  }
  return out;
}

/// Xoshiro256** 1.0 (Blackman, Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256(std::uint64_t seed = 0) noexcept { reseed(seed); }

  constexpr void reseed(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
};

/// Uniform on the open interval (0, 1), 53-bit resolution.
inline double uniform_open(Xoshiro256& gen) noexcept {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal sampler (Box-Muller, caches the second variate).
class NormalSampler {
 public:
  double operator()(Xoshiro256& gen) noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open(gen);
    const double u2 = uniform_open(gen);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Gamma(shape, 1) via Marsaglia and Tsang (2000); shape < 1 uses the
/// U^(1/shape) boost.
inline double gamma_variate(double shape, Xoshiro256& gen, NormalSampler& normal) noexcept {
  if (shape < 1.0) {
    const double u = uniform_open(gen);
    return gamma_variate(shape + 1.0, gen, normal) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal(gen);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open(gen);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

/// Student-t with `df` degrees of freedom: Z / sqrt(G / df), G ~ chi2(df).
inline double student_t_variate(double df, Xoshiro256& gen, NormalSampler& normal) noexcept {
  const double z = normal(gen);
  const double chi2 = 2.0 * gamma_variate(0.5 * df, gen, normal);
  return z / std::sqrt(chi2 / df);
}

}  // namespace panel_cpd::rng
