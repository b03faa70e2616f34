#pragma once

// CUSUM processes on the split-point grid k = 0..T.
//
// For one standardized series the CUSUM at split k is
//   S(k) = (sum_{t<=k} y_t - (k/T) sum_t y_t) / (sqrt(T) v),
// and the panel process centers each S(k)^2 by k(T-k)/T^2, the variance of
// a Brownian bridge at k/T, before summing over individuals:
//   W(k) = N^{-1/2} sum_i (S_i(k)^2 - k(T-k)/T^2).
// Since floor(Tx) is piecewise constant, sup_{0<x<1} |W| is attained on the
// interior grid k = 1..T-1.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "panel_cpd/error.hpp"
#include "panel_cpd/lrv.hpp"
#include "panel_cpd/panel.hpp"
#include "panel_cpd/parallel.hpp"
#include "panel_cpd/psi.hpp"
#include "panel_cpd/robust.hpp"

namespace panel_cpd {

struct CusumProcess {
  std::vector<double> values;  // k = 0..T
  double v_used = 1.0;
};

struct PanelProcess {
  std::vector<double> values;  // k = 0..T
  std::size_t individuals = 0;
  std::size_t periods = 0;
};

/// Brownian-bridge centering k(T-k)/T^2.
inline double bridge_variance(std::size_t k, std::size_t T) noexcept {
  const double kd = static_cast<double>(k);
  const double Td = static_cast<double>(T);
  return kd * (Td - kd) / (Td * Td);
}

/// Writes S(k), k = 0..T, into `out` (length T + 1).
inline void individual_cusum(std::span<const double> transformed, double v, std::span<double> out) {
  const std::size_t T = transformed.size();
  if (T < 2) throw DataError("individual_cusum: need at least 2 observations");
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw UsageError("individual_cusum: long-run scale v must be positive");
  }
  if (out.size() != T + 1) throw UsageError("individual_cusum: output must have length T + 1");

  double total = 0.0;
  for (double y : transformed) total += y;
  const double Td = static_cast<double>(T);
  const double scale = 1.0 / (std::sqrt(Td) * v);

  out[0] = 0.0;
  double partial = 0.0;
  for (std::size_t k = 1; k < T; ++k) {
    partial += transformed[k - 1];
    out[k] = (partial - (static_cast<double>(k) / Td) * total) * scale;
  }
  out[T] = 0.0;
}

inline CusumProcess individual_cusum(std::span<const double> transformed, double v) {
  CusumProcess p;
  p.values.resize(transformed.size() + 1);
  individual_cusum(transformed, v, p.values);
  p.v_used = v;
  return p;
}

/// Adds S(k)^2 - k(T-k)/T^2 for k = 0..T into `acc` (length T + 1).
inline void accumulate_centered_square(std::span<const double> cusum, std::span<double> acc) {
  const std::size_t T = cusum.size() - 1;
  for (std::size_t k = 0; k <= T; ++k) acc[k] += cusum[k] * cusum[k] - bridge_variance(k, T);
}

/// Assembles W from per-individual CUSUM sequences (each of length T + 1).
///
/// The sum over individuals is compensated and runs in row order, so the
/// result does not depend on how the rows were produced.
inline PanelProcess panel_process(const std::vector<std::vector<double>>& cusums) {
  if (cusums.empty()) throw DataError("panel_process: no individuals");
  const std::size_t len = cusums.front().size();
  if (len < 3) throw DataError("panel_process: need at least 2 time points");
  const std::size_t T = len - 1;
  for (const auto& c : cusums) {
    if (c.size() != len) throw DataError("panel_process: CUSUM lengths differ across individuals");
  }

  PanelProcess w;
  w.individuals = cusums.size();
  w.periods = T;
  w.values.assign(len, 0.0);
  const double norm = 1.0 / std::sqrt(static_cast<double>(cusums.size()));
  for (std::size_t k = 1; k < T; ++k) {
    const double centering = bridge_variance(k, T);
    CompensatedSum sum;
    for (const auto& c : cusums) sum.add(c[k] * c[k] - centering);
    w.values[k] = sum.value() * norm;
    if (!std::isfinite(w.values[k])) {
      throw NumericalError("panel_process: non-finite value at split " + std::to_string(k));
    }
  }
  return w;
}

/// W for a panel given each row's psi, location/scale and long-run variance.
/// `psi` holds either one shared spec or one per row.
inline PanelProcess panel_statistic(const Panel& panel, std::span<const PsiSpec> psi,
                                    std::span<const LocationScaleEstimate> standardization,
                                    std::span<const LrvEstimate> lrv, unsigned threads = 1) {
  const std::size_t N = panel.individuals();
  const std::size_t T = panel.periods();
  if (psi.size() != 1 && psi.size() != N) {
    throw UsageError("panel_statistic: expected 1 or " + std::to_string(N) + " psi specs");
  }
  if (standardization.size() != N || lrv.size() != N) {
    throw UsageError("panel_statistic: per-individual inputs must have " + std::to_string(N) +
                     " entries");
  }
  std::vector<std::vector<double>> cusums(N);
  parallel_for(N, threads, [&](std::size_t i) {
    const PsiSpec& spec = psi.size() == 1 ? psi[0] : psi[i];
    const auto y = transform_series(
        spec, {standardization[i].mu_hat, standardization[i].sigma_hat}, panel.row(i));
    cusums[i].resize(T + 1);
    individual_cusum(y, std::sqrt(lrv[i].v_squared), cusums[i]);
  });
  return panel_process(cusums);
}

struct SupResult {
  double value = 0.0;
  std::size_t argmax = 1;
};

/// max_{k=1..T-1} |W(k)|; ties resolve to the smallest k.
inline SupResult sup_statistic(const PanelProcess& process) {
  const std::size_t T = process.values.size() - 1;
  SupResult r{0.0, 1};
  bool first = true;
  for (std::size_t k = 1; k < T; ++k) {
    const double a = std::abs(process.values[k]);
    if (first || a > r.value) {
      r = {a, k};
      first = false;
    }
  }
  return r;
}

/// Riemann sum (1/T) sum_{k=1}^{T-1} |W(k)| of the step function.
inline double integral_statistic(const PanelProcess& process) {
  const std::size_t T = process.values.size() - 1;
  double acc = 0.0;
  for (std::size_t k = 1; k < T; ++k) acc += std::abs(process.values[k]);
  return acc / static_cast<double>(T);
}

}  // namespace panel_cpd
