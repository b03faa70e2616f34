#pragma once

// Kernel estimators of the long-run variance
//   v^2 = gamma(0) + 2 * sum_{h >= 1} gamma(h)
// of a (transformed) series.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>

#include "panel_cpd/error.hpp"

namespace panel_cpd {

/// Lag-window families. Bartlett is not differentiable at 0 and so falls
/// outside the smoothness conditions of the consistency theory; it is
/// available for comparison only.
enum class KernelFamily { FlatTop, Parzen, Daniell, Bartlett };

/// Lag-window weight k(x); every family is supported on [-1, 1].
inline double kernel_eval(KernelFamily family, double x) noexcept {
  const double a = std::abs(x);
  if (a > 1.0) return 0.0;
  switch (family) {
    case KernelFamily::FlatTop:
      return a <= 0.5 ? 1.0 : 2.0 - 2.0 * a;
    case KernelFamily::Parzen:
      if (a <= 0.5) return 1.0 - 6.0 * a * a + 6.0 * a * a * a;
      return 2.0 * (1.0 - a) * (1.0 - a) * (1.0 - a);
    case KernelFamily::Daniell: {
      if (a == 0.0) return 1.0;
      const double px = std::numbers::pi * a;
      return std::sin(px) / px;
    }
    case KernelFamily::Bartlett:
      return 1.0 - a;
  }
  return 0.0;
}

inline KernelFamily parse_kernel(const std::string& name) {
  if (name == "flat-top") return KernelFamily::FlatTop;
  if (name == "parzen") return KernelFamily::Parzen;
  if (name == "daniell") return KernelFamily::Daniell;
  if (name == "bartlett") return KernelFamily::Bartlett;
  throw UsageError("unknown kernel '" + name + "' (expected flat-top|parzen|daniell|bartlett)");
}

inline std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::FlatTop:
      return "flat-top";
    case KernelFamily::Parzen:
      return "parzen";
    case KernelFamily::Daniell:
      return "daniell";
    case KernelFamily::Bartlett:
      return "bartlett";
  }
  return "flat-top";
}

/// Bandwidth b_T: floor(T^exponent) (at least 1), or a fixed lag count.
struct BandwidthRule {
  enum class Kind { PowerLaw, Fixed };
  Kind kind = Kind::PowerLaw;
  double exponent = 0.4;
  std::size_t fixed = 1;

  static BandwidthRule power_law(double exponent = 0.4) { return {Kind::PowerLaw, exponent, 1}; }
  static BandwidthRule fixed_lags(std::size_t b) { return {Kind::Fixed, 0.0, b}; }

  std::size_t bandwidth(std::size_t T) const {
    if (kind == Kind::Fixed) return fixed;
    const auto b = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(T), exponent)));
    return std::max<std::size_t>(b, 1);
  }

  friend bool operator==(const BandwidthRule&, const BandwidthRule&) = default;
};

struct LrvConfig {
  KernelFamily kernel = KernelFamily::FlatTop;
  BandwidthRule bandwidth = BandwidthRule::power_law(0.4);
  double degeneracy_floor = 1e-12;

  friend bool operator==(const LrvConfig&, const LrvConfig&) = default;
};

inline void validate(const LrvConfig& config) {
  if (config.bandwidth.kind == BandwidthRule::Kind::PowerLaw &&
      !(config.bandwidth.exponent > 0.0 && config.bandwidth.exponent < 1.0)) {
    throw UsageError("bandwidth exponent must lie in (0, 1)");
  }
  if (config.bandwidth.kind == BandwidthRule::Kind::Fixed && config.bandwidth.fixed == 0) {
    throw UsageError("fixed bandwidth must be a positive integer");
  }
  if (!(config.degeneracy_floor > 0.0)) throw UsageError("LRV degeneracy floor must be positive");
}

struct LrvEstimate {
  double v_squared = 0.0;
  bool floored = false;
  std::size_t bandwidth_used = 1;

  friend bool operator==(const LrvEstimate&, const LrvEstimate&) = default;
};

/// Empirical autocovariance at lag h with divisor T.
inline double autocovariance(std::span<const double> series, std::size_t h) {
  const std::size_t T = series.size();
  if (h >= T) {
    throw UsageError("autocovariance: lag " + std::to_string(h) + " out of range for length " +
                     std::to_string(T));
  }
  double mean = 0.0;
  for (double y : series) mean += y;
  mean /= static_cast<double>(T);
  double acc = 0.0;
  for (std::size_t t = 0; t + h < T; ++t) acc += (series[t] - mean) * (series[t + h] - mean);
  return acc / static_cast<double>(T);
}

/// gamma(0) + 2 * sum_{h=1}^{min(b, T-1)} gamma(h) k(h / b).
///
/// The flat-top window is not positive semidefinite, so the raw value may
/// be negative or tiny. Below `degeneracy_floor` the estimate falls back to
/// gamma(0), or to the floor itself, and is marked `floored`.
inline LrvEstimate estimate_lrv(std::span<const double> series, const LrvConfig& config) {
  const std::size_t T = series.size();
  if (T < 2) throw DataError("estimate_lrv: need at least 2 observations");
  const std::size_t b = config.bandwidth.bandwidth(T);
  const std::size_t max_lag = std::min(b, T - 1);

  double mean = 0.0;
  for (double y : series) mean += y;
  mean /= static_cast<double>(T);

  auto gamma = [&](std::size_t h) {
    double acc = 0.0;
    for (std::size_t t = 0; t + h < T; ++t) acc += (series[t] - mean) * (series[t + h] - mean);
    return acc / static_cast<double>(T);
  };

  const double gamma0 = gamma(0);
  double v2 = gamma0;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t h = 1; h <= max_lag; ++h) {
    const double w = kernel_eval(config.kernel, static_cast<double>(h) * inv_b);
    if (w != 0.0) v2 += 2.0 * w * gamma(h);
  }

  LrvEstimate est{v2, false, b};
  if (!(v2 >= config.degeneracy_floor)) {
    est.floored = true;
    est.v_squared = gamma0 >= config.degeneracy_floor ? gamma0 : config.degeneracy_floor;
  }
  return est;
}

}  // namespace panel_cpd
