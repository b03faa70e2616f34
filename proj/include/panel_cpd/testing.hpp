#pragma once

// End-to-end panel change-point test.
//
// Per individual: location/scale (median/MAD or fixed), psi-transform,
// kernel long-run variance, CUSUM. The centered squared CUSUMs are summed
// into W over the non-degenerate individuals and the sup (or integral) of
// |W| is compared against a quantile of sup |Gamma|.

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "panel_cpd/cusum.hpp"
#include "panel_cpd/error.hpp"
#include "panel_cpd/limit_process.hpp"
#include "panel_cpd/lrv.hpp"
#include "panel_cpd/panel.hpp"
#include "panel_cpd/parallel.hpp"
#include "panel_cpd/psi.hpp"
#include "panel_cpd/robust.hpp"

namespace panel_cpd {

struct Standardization {
  enum class Kind { MedianMad, Fixed, PerIndividualFixed };
  Kind kind = Kind::MedianMad;
  double mu = 0.0;
  double sigma = 1.0;
  std::vector<StandardizedSeriesParams> per_individual;
  double mad_constant = kMadGaussian;

  static Standardization median_mad(double c_f = kMadGaussian) {
    Standardization s;
    s.mad_constant = c_f;
    return s;
  }
  static Standardization fixed(double mu, double sigma) {
    Standardization s;
    s.kind = Kind::Fixed;
    s.mu = mu;
    s.sigma = sigma;
    return s;
  }
  static Standardization per_individual_fixed(std::vector<StandardizedSeriesParams> params) {
    Standardization s;
    s.kind = Kind::PerIndividualFixed;
    s.per_individual = std::move(params);
    return s;
  }
};

enum class StatisticKind { Sup, Integral };

struct TestConfig {
  PsiSpec psi = PsiSpec::smooth_huber(1.345);
  Standardization standardization = Standardization::median_mad();
  LrvConfig lrv{};
  double alpha = 0.05;
  StatisticKind statistic = StatisticKind::Sup;
  /// Null means the built-in quantile table.
  std::shared_ptr<const CriticalValues> critical_values;
  /// The integral functional has no shipped critical values; supply one to
  /// get a decision.
  std::optional<double> integral_critical_value;
  unsigned threads = 1;

  /// Robust default: C2 Huber, median/MAD, flat-top kernel with b_T = T^0.4.
  static TestConfig robust() { return {}; }

  /// Classical panel CUSUM: identity psi on the raw data.
  static TestConfig non_robust() {
    TestConfig c;
    c.psi = PsiSpec::identity();
    c.standardization = Standardization::fixed(0.0, 1.0);
    return c;
  }
};

struct IndividualDiagnostics {
  double mu_hat = 0.0;
  double sigma_hat = 0.0;
  double v_squared = 0.0;
  bool floored = false;
  bool skipped = false;
  std::string skip_reason;

  friend bool operator==(const IndividualDiagnostics&, const IndividualDiagnostics&) = default;
};

struct TestResult {
  StatisticKind statistic = StatisticKind::Sup;
  double statistic_value = 0.0;
  /// NaN when no critical value is available (integral without one supplied).
  double critical_value = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> p_value;
  bool reject = false;
  std::size_t argmax_split = 1;
  double alpha = 0.05;
  std::size_t individuals = 0;
  std::size_t periods = 0;
  std::size_t effective_individuals = 0;
  std::size_t bandwidth = 1;
  std::vector<IndividualDiagnostics> per_individual;
};

inline std::string to_string(StatisticKind kind) {
  return kind == StatisticKind::Sup ? "sup" : "integral";
}

inline void validate(const TestConfig& config) {
  validate(config.psi);
  validate(config.lrv);
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw UsageError("alpha must lie in (0, 1), got " + std::to_string(config.alpha));
  }
  if (config.standardization.kind == Standardization::Kind::Fixed &&
      !(config.standardization.sigma > 0.0)) {
    throw UsageError("fixed standardization needs sigma > 0");
  }
}

/// Runs the test. When `process` is non-null it receives W on k = 0..T.
inline TestResult run_test(const Panel& panel, const TestConfig& config,
                           PanelProcess* process = nullptr) {
  validate(config);
  const std::size_t N = panel.individuals();
  const std::size_t T = panel.periods();
  const auto& stdz = config.standardization;
  if (stdz.kind == Standardization::Kind::PerIndividualFixed && stdz.per_individual.size() != N) {
    throw UsageError("per-individual standardization has " +
                     std::to_string(stdz.per_individual.size()) + " entries for " +
                     std::to_string(N) + " individuals");
  }

  // Resolve the critical value first so a bad alpha fails before any work.
  double critical = std::numeric_limits<double>::quiet_NaN();
  const CriticalValues builtin_cv;
  const CriticalValues& cv = config.critical_values ? *config.critical_values : builtin_cv;
  if (config.statistic == StatisticKind::Sup) {
    critical = cv.critical_value(config.alpha);
  } else if (config.integral_critical_value) {
    critical = *config.integral_critical_value;
  }

  TestResult result;
  result.statistic = config.statistic;
  result.alpha = config.alpha;
  result.individuals = N;
  result.periods = T;
  result.bandwidth = config.lrv.bandwidth.bandwidth(T);
  result.per_individual.resize(N);
  std::vector<std::vector<double>> cusums(N);

  parallel_for(N, config.threads, [&](std::size_t i) {
    auto& diag = result.per_individual[i];
    const auto row = panel.row(i);
    LocationScaleEstimate ls;
    switch (stdz.kind) {
      case Standardization::Kind::MedianMad:
        ls = estimate_median_mad(row, stdz.mad_constant);
        break;
      case Standardization::Kind::Fixed:
        ls = fixed_location_scale(stdz.mu, stdz.sigma);
        break;
      case Standardization::Kind::PerIndividualFixed:
        ls = fixed_location_scale(stdz.per_individual[i].mu, stdz.per_individual[i].sigma);
        break;
    }
    diag.mu_hat = ls.mu_hat;
    diag.sigma_hat = ls.sigma_hat;
    if (!(ls.sigma_hat > 0.0)) {
      diag.skipped = true;
      diag.skip_reason = stdz.kind == Standardization::Kind::MedianMad
                             ? "zero MAD (degenerate individual)"
                             : "nonpositive fixed scale";
      return;
    }
    const auto y = transform_series(config.psi, {ls.mu_hat, ls.sigma_hat}, row);
    const LrvEstimate lrv = estimate_lrv(y, config.lrv);
    diag.v_squared = lrv.v_squared;
    diag.floored = lrv.floored;
    cusums[i].resize(T + 1);
    individual_cusum(y, std::sqrt(lrv.v_squared), cusums[i]);
  });

  std::vector<std::vector<double>> kept;
  kept.reserve(N);
  for (std::size_t i = 0; i < N; ++i) {
    if (!result.per_individual[i].skipped) kept.push_back(std::move(cusums[i]));
  }
  if (kept.empty()) throw DataError("all individuals are degenerate (zero scale); nothing to test");
  result.effective_individuals = kept.size();

  PanelProcess w = panel_process(kept);
  if (config.statistic == StatisticKind::Sup) {
    const SupResult sup = sup_statistic(w);
    result.statistic_value = sup.value;
    result.argmax_split = sup.argmax;
    result.p_value = cv.p_value(sup.value);
  } else {
    result.statistic_value = integral_statistic(w);
    result.argmax_split = sup_statistic(w).argmax;
  }
  result.critical_value = critical;
  result.reject = result.statistic_value > critical;
  if (process) *process = std::move(w);
  return result;
}

}  // namespace panel_cpd
