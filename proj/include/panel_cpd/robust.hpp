#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "panel_cpd/error.hpp"

namespace panel_cpd {

/// Gaussian consistency factor of the MAD.
inline constexpr double kMadGaussian = 1.4826;

namespace detail {

// Median of a scratch buffer, reordering it in place.
inline double median_inplace(std::span<double> v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + 0.5 * (upper - lower);
}

}  // namespace detail

/// Sample median; the midpoint of the two central order statistics for even length.
inline double median(std::span<const double> series) {
  if (series.empty()) throw DataError("median: empty input");
  std::vector<double> scratch(series.begin(), series.end());
  return detail::median_inplace(scratch);
}

/// c_F * median(|x - median(x)|).
inline double mad(std::span<const double> series, double c_f = kMadGaussian) {
  if (series.empty()) throw DataError("mad: empty input");
  if (!(c_f > 0.0)) throw UsageError("mad: consistency constant must be positive");
  std::vector<double> scratch(series.begin(), series.end());
  const double center = detail::median_inplace(scratch);
  for (std::size_t t = 0; t < series.size(); ++t) scratch[t] = std::abs(series[t] - center);
  return c_f * detail::median_inplace(scratch);
}

enum class StandardizationMethod { MedianMad, Fixed };

struct LocationScaleEstimate {
  double mu_hat = 0.0;
  double sigma_hat = 1.0;
  StandardizationMethod method = StandardizationMethod::Fixed;

  friend bool operator==(const LocationScaleEstimate&, const LocationScaleEstimate&) = default;
};

/// Median and MAD of one series, sharing one scratch buffer.
inline LocationScaleEstimate estimate_median_mad(std::span<const double> series,
                                                 double c_f = kMadGaussian) {
  if (series.empty()) throw DataError("median/MAD: empty input");
  if (!(c_f > 0.0)) throw UsageError("mad: consistency constant must be positive");
  std::vector<double> scratch(series.begin(), series.end());
  const double center = detail::median_inplace(scratch);
  for (std::size_t t = 0; t < series.size(); ++t) scratch[t] = std::abs(series[t] - center);
  return {center, c_f * detail::median_inplace(scratch), StandardizationMethod::MedianMad};
}

inline LocationScaleEstimate fixed_location_scale(double mu, double sigma) {
  return {mu, sigma, StandardizationMethod::Fixed};
}

}  // namespace panel_cpd
