#pragma once

// Limit process of the panel CUSUM statistic.
//
// W is a normalized sum of independent copies of BB(x)^2 - x(1 - x) for a
// Brownian bridge BB, so its limit Gamma is the centered Gaussian process
// with Cov(Gamma(x), Gamma(y)) = 2 Cov(BB(x), BB(y))^2 = 2 x^2 (1 - y)^2 for
// x <= y. It is simulated via
//   Gamma(x) = sqrt(2) (1 - x)^2 B(x^2 / (1 - x)^2)
// with B a standard Brownian motion; this reproduces the reference
// quantiles 0.899 / 0.990 / 1.173 at levels 0.90 / 0.95 / 0.99.
// The time change diverges at x = 1, so paths are generated on
// x_j = j / (M - 1), j = 0..M-2, and Gamma(1) is pinned to 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "panel_cpd/error.hpp"
#include "panel_cpd/parallel.hpp"
#include "panel_cpd/rng.hpp"

namespace panel_cpd {

struct GammaPathConfig {
  std::size_t grid_points = 2001;
  std::uint64_t seed = 20240101;
};

/// Precomputed time change for one grid size.
class GammaGrid {
 public:
  explicit GammaGrid(std::size_t grid_points) : m_(grid_points) {
    if (m_ < 3) throw UsageError("Gamma grid needs at least 3 points");
    step_sd_.resize(m_ - 1);
    damping_.resize(m_ - 1);
    double prev_t = 0.0;
    for (std::size_t j = 0; j + 1 < m_; ++j) {
      const double x = static_cast<double>(j) / static_cast<double>(m_ - 1);
      const double t = x * x / ((1.0 - x) * (1.0 - x));
      step_sd_[j] = std::sqrt(t - prev_t);
      damping_[j] = std::sqrt(2.0) * (1.0 - x) * (1.0 - x);
      prev_t = t;
    }
  }

  std::size_t grid_points() const noexcept { return m_; }

  double x(std::size_t j) const noexcept {
    return static_cast<double>(j) / static_cast<double>(m_ - 1);
  }

  /// Fills `out` (length M) with Gamma(x_j); out[0] = out[M-1] = 0.
  void path(std::uint64_t path_seed, std::span<double> out) const {
    rng::Xoshiro256 gen(path_seed);
    rng::NormalSampler normal;
    double b = 0.0;
    out[0] = 0.0;
    for (std::size_t j = 1; j + 1 < m_; ++j) {
      b += step_sd_[j] * normal(gen);
      out[j] = damping_[j] * b;
    }
    out[m_ - 1] = 0.0;
  }

  /// max_j |Gamma(x_j)| over one path, without storing it.
  double sup_abs(std::uint64_t path_seed) const {
    rng::Xoshiro256 gen(path_seed);
    rng::NormalSampler normal;
    double b = 0.0;
    double best = 0.0;
    for (std::size_t j = 1; j + 1 < m_; ++j) {
      b += step_sd_[j] * normal(gen);
      best = std::max(best, std::abs(damping_[j] * b));
    }
    return best;
  }

 private:
  std::size_t m_;
  std::vector<double> step_sd_;
  std::vector<double> damping_;
};

/// Cov(Gamma(x), Gamma(y)).
inline double gamma_covariance(double x, double y) noexcept {
  const double lo = std::min(x, y);
  const double hi = std::max(x, y);
  return 2.0 * lo * lo * (1.0 - hi) * (1.0 - hi);
}

/// Seed of path `index` under master seed `seed`.
inline std::uint64_t gamma_path_seed(std::uint64_t seed, std::uint64_t index) {
  return rng::derive_seed(seed, {0x47414D4DULL, index});
}

/// Gamma on the grid for path `index`.
inline std::vector<double> simulate_gamma_path(const GammaPathConfig& config,
                                               std::uint64_t index = 0) {
  const GammaGrid grid(config.grid_points);
  std::vector<double> out(config.grid_points);
  grid.path(gamma_path_seed(config.seed, index), out);
  return out;
}

/// One draw of sup |Gamma| (path `index` of the configured stream).
inline double simulate_gamma_sup(const GammaPathConfig& config, std::uint64_t index = 0) {
  return GammaGrid(config.grid_points).sup_abs(gamma_path_seed(config.seed, index));
}

/// `paths` independent sup |Gamma| draws in path order; identical for any
/// thread count.
inline std::vector<double> simulate_sup_samples(std::size_t paths, const GammaPathConfig& config,
                                                unsigned threads = 1) {
  const GammaGrid grid(config.grid_points);
  std::vector<double> sups(paths);
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (paths + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(paths, (c + 1) * kChunk);
    for (std::size_t r = c * kChunk; r < end; ++r) sups[r] = grid.sup_abs(gamma_path_seed(config.seed, r));
  });
  return sups;
}

/// Empirical quantile of sorted data, linear interpolation between order
/// statistics (Hyndman-Fan type 7).
inline double empirical_quantile_sorted(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw DataError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct QuantileEntry {
  double level = 0.0;  // probability, e.g. 0.95
  double q = 0.0;

  friend bool operator==(const QuantileEntry&, const QuantileEntry&) = default;
};

/// Quantiles of sup |Gamma| at increasing probability levels.
struct QuantileTable {
  std::vector<QuantileEntry> entries;
  std::string source = "builtin";
  std::size_t paths = 0;
  std::size_t grid_points = 0;
  std::uint64_t seed = 0;

  /// The published reference quantiles, shipped so no simulation is needed.
  static QuantileTable builtin() {
    QuantileTable t;
    t.entries = {{0.9, 0.899}, {0.95, 0.990}, {0.975, 1.072}, {0.99, 1.173}, {0.995, 1.245}};
    t.source = "builtin";
    return t;
  }

  /// q at an exactly tabulated level, if present.
  std::optional<double> at(double level) const {
    for (const auto& e : entries) {
      if (std::abs(e.level - level) < 1e-9) return e.q;
    }
    return std::nullopt;
  }

  friend bool operator==(const QuantileTable&, const QuantileTable&) = default;
};

inline void validate(const QuantileTable& table) {
  if (table.entries.empty()) throw DataError("quantile table is empty");
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    const auto& e = table.entries[i];
    if (!(e.level > 0.0 && e.level < 1.0) || !(e.q > 0.0)) {
      throw DataError("quantile table: invalid entry " + std::to_string(i + 1));
    }
    if (i > 0 && !(e.level > table.entries[i - 1].level && e.q > table.entries[i - 1].q)) {
      throw DataError("quantile table: levels and quantiles must be strictly increasing");
    }
  }
}

/// Monte Carlo quantile table from `paths` sup |Gamma| draws.
inline QuantileTable estimate_quantiles(std::size_t paths, std::vector<double> levels,
                                        const GammaPathConfig& config, unsigned threads = 1) {
  if (paths < 1000) throw UsageError("estimate_quantiles: need at least 1000 paths");
  for (double a : levels) {
    if (!(a > 0.0 && a < 1.0)) throw UsageError("estimate_quantiles: levels must lie in (0, 1)");
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  auto sups = simulate_sup_samples(paths, config, threads);
  std::sort(sups.begin(), sups.end());
  QuantileTable t;
  t.source = "simulated";
  t.paths = paths;
  t.grid_points = config.grid_points;
  t.seed = config.seed;
  for (double a : levels) t.entries.push_back({a, empirical_quantile_sorted(sups, a)});
  return t;
}

/// Fraction of simulated sups at or above `statistic`.
inline double p_value(double statistic, std::span<const double> samples) {
  if (samples.empty()) throw DataError("p_value: empty sample set");
  if (!(statistic >= 0.0)) throw UsageError("p_value: statistic must be nonnegative");
  std::size_t hits = 0;
  for (double s : samples) hits += s >= statistic ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

/// Piecewise-linear interpolation of (q, 1 - level), anchored at (0, 1).
/// Beyond the largest tabulated quantile the result is clamped to the
/// table's tail resolution 1 - max level.
inline double p_value(double statistic, const QuantileTable& table) {
  validate(table);
  if (!(statistic >= 0.0)) throw UsageError("p_value: statistic must be nonnegative");
  double prev_q = 0.0;
  double prev_p = 1.0;
  for (const auto& e : table.entries) {
    const double p = 1.0 - e.level;
    if (statistic <= e.q) {
      return prev_p + (statistic - prev_q) / (e.q - prev_q) * (p - prev_p);
    }
    prev_q = e.q;
    prev_p = p;
  }
  return prev_p;
}

/// Where critical values come from: a quantile table or raw simulated sups.
class CriticalValues {
 public:
  CriticalValues() : source_(QuantileTable::builtin()) {}
  explicit CriticalValues(QuantileTable table) : source_(std::move(table)) {
    validate(std::get<QuantileTable>(source_));
  }
  explicit CriticalValues(std::vector<double> samples) {
    if (samples.empty()) throw DataError("critical values: empty sample set");
    std::sort(samples.begin(), samples.end());
    source_ = std::move(samples);
  }

  bool is_table() const noexcept { return std::holds_alternative<QuantileTable>(source_); }

  /// Upper-alpha critical value. Tables only answer tabulated levels;
  /// other alphas need simulated samples.
  double critical_value(double alpha) const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
    if (const auto* table = std::get_if<QuantileTable>(&source_)) {
      if (auto q = table->at(1.0 - alpha)) return *q;
      throw UsageError("alpha " + std::to_string(alpha) +
                       " is not covered by the quantile table; simulate critical values instead");
    }
    return empirical_quantile_sorted(std::get<std::vector<double>>(source_), 1.0 - alpha);
  }

  double p_value(double statistic) const {
    if (const auto* table = std::get_if<QuantileTable>(&source_)) {
      return panel_cpd::p_value(statistic, *table);
    }
    return panel_cpd::p_value(statistic, std::get<std::vector<double>>(source_));
  }

 private:
  std::variant<QuantileTable, std::vector<double>> source_;
};

}  // namespace panel_cpd
