#pragma once

// Psi-functions bounding the influence of single observations, and the
// per-observation transform Y_t = psi((x_t - mu) / sigma).

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

#include "panel_cpd/error.hpp"

namespace panel_cpd {

enum class PsiFamily { Identity, Huber, SmoothHuber, Bisquare };

/// A psi-function family with its tuning constants.
///
/// `k` is the clipping (Huber, SmoothHuber) or rejection (Bisquare) point.
/// `delta` is the half-width of the SmoothHuber blend band around +-k.
/// Bisquare is redescending and shrinks large level shifts towards zero;
/// it is offered for comparison but is a poor choice for change-point work.
struct PsiSpec {
  PsiFamily family = PsiFamily::Identity;
  double k = 1.345;
  double delta = 0.0;

  static PsiSpec identity() { return {PsiFamily::Identity, 0.0, 0.0}; }
  static PsiSpec huber(double k = 1.345) { return {PsiFamily::Huber, k, 0.0}; }
  static PsiSpec smooth_huber(double k = 1.345) { return {PsiFamily::SmoothHuber, k, 0.5 * k}; }
  static PsiSpec smooth_huber(double k, double delta) { return {PsiFamily::SmoothHuber, k, delta}; }
  static PsiSpec bisquare(double k = 4.685) { return {PsiFamily::Bisquare, k, 0.0}; }

  friend bool operator==(const PsiSpec&, const PsiSpec&) = default;
};

/// Throws UsageError unless k > 0 (and 0 < delta < k for SmoothHuber).
inline void validate(const PsiSpec& spec) {
  if (spec.family == PsiFamily::Identity) return;
  if (!(spec.k > 0.0) || !std::isfinite(spec.k)) {
    throw UsageError("psi: tuning constant k must be positive, got " + std::to_string(spec.k));
  }
  if (spec.family == PsiFamily::SmoothHuber && !(spec.delta > 0.0 && spec.delta < spec.k)) {
    throw UsageError("psi: smooth-huber blend half-width must satisfy 0 < delta < k");
  }
}

/// Upper bound on |psi(x)|; infinity for the identity.
inline double psi_bound(const PsiSpec& spec) {
  switch (spec.family) {
    case PsiFamily::Identity:
      return HUGE_VAL;
    case PsiFamily::Huber:
    case PsiFamily::SmoothHuber:
      return spec.k;
    case PsiFamily::Bisquare:
      // attained at x = k / sqrt(5)
      return spec.k * 16.0 / (25.0 * std::sqrt(5.0));
  }
  return HUGE_VAL;
}

namespace detail {

// Positive half of the C2 Huber. On the band [k - d, k + d] we use the
// Hermite interpolant of degree <= 5 matching value, slope and curvature of
// the identity at k - d and of the constant k at k + d. With u the position
// in the band the interpolant reduces to a + 2d(u - u^3) + d u^4.
inline double smooth_huber_positive(double x, double k, double d) noexcept {
  const double a = k - d;
  if (x <= a) return x;
  if (x >= k + d) return k;
  const double u = (x - a) / (2.0 * d);
  const double u2 = u * u;
  return a + d * (2.0 * u - 2.0 * u * u2 + u2 * u2);
}

}  // namespace detail

/// psi(x) for a validated spec.
inline double eval_psi(const PsiSpec& spec, double x) noexcept {
  switch (spec.family) {
    case PsiFamily::Identity:
      return x;
    case PsiFamily::Huber:
      return x < -spec.k ? -spec.k : (x > spec.k ? spec.k : x);
    case PsiFamily::SmoothHuber: {
      const double y = detail::smooth_huber_positive(std::abs(x), spec.k, spec.delta);
      return x < 0.0 ? -y : y;
    }
    case PsiFamily::Bisquare: {
      if (std::abs(x) > spec.k) return 0.0;
      const double r = x / spec.k;
      const double w = 1.0 - r * r;
      return x * w * w;
    }
  }
  return x;
}

/// Location/scale tuning parameters used to standardize one series.
struct StandardizedSeriesParams {
  double mu = 0.0;
  double sigma = 1.0;
};

/// Writes psi((x_t - mu) / sigma) into `out` (same length as `series`).
inline void transform_series(const PsiSpec& spec, const StandardizedSeriesParams& params,
                             std::span<const double> series, std::span<double> out) {
  if (!(params.sigma > 0.0) || !std::isfinite(params.sigma)) {
    throw UsageError("transform_series: sigma must be positive, got " +
                     std::to_string(params.sigma));
  }
  if (out.size() != series.size()) {
    throw UsageError("transform_series: output length does not match input");
  }
  for (std::size_t t = 0; t < series.size(); ++t) {
    out[t] = eval_psi(spec, (series[t] - params.mu) / params.sigma);
  }
}

inline std::vector<double> transform_series(const PsiSpec& spec,
                                            const StandardizedSeriesParams& params,
                                            std::span<const double> series) {
  std::vector<double> out(series.size());
  transform_series(spec, params, series, out);
  return out;
}

/// Parses "identity", "huber[:k]", "smooth-huber[:k[:delta]]", "bisquare[:k]".
inline PsiSpec parse_psi(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(':', start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  auto number = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      const double v = std::stod(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
      return v;
    } catch (const std::exception&) {
      throw UsageError("psi: cannot parse number '" + parts[i] + "' in '" + text + "'");
    }
  };

  PsiSpec spec;
  const std::string& name = parts[0];
  if (name == "identity" && parts.size() == 1) {
    spec = PsiSpec::identity();
  } else if (name == "huber" && parts.size() <= 2) {
    spec = PsiSpec::huber(parts.size() > 1 ? number(1) : 1.345);
  } else if (name == "smooth-huber" && parts.size() <= 3) {
    const double k = parts.size() > 1 ? number(1) : 1.345;
    spec = PsiSpec::smooth_huber(k, parts.size() > 2 ? number(2) : 0.5 * k);
  } else if (name == "bisquare" && parts.size() <= 2) {
    spec = PsiSpec::bisquare(parts.size() > 1 ? number(1) : 4.685);
  } else {
    throw UsageError("psi: unknown specification '" + text + "'");
  }
  validate(spec);
  return spec;
}

/// Inverse of parse_psi.
inline std::string to_string(const PsiSpec& spec) {
  auto num = [](double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
  };
  switch (spec.family) {
    case PsiFamily::Identity:
      return "identity";
    case PsiFamily::Huber:
      return "huber:" + num(spec.k);
    case PsiFamily::SmoothHuber:
      return "smooth-huber:" + num(spec.k) + ":" + num(spec.delta);
    case PsiFamily::Bisquare:
      return "bisquare:" + num(spec.k);
  }
  return "identity";
}

}  // namespace panel_cpd
