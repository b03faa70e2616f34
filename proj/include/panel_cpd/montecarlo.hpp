#pragma once

// Simulation harness: AR(1) panels with optional common level shift, and
// rejection-rate experiments (empirical size over an (N, T) grid, power
// over a grid of jump-height scales).
//
// Seeding: row i of replication r draws innovations from stream
// (seed, r, i, 1) and its jump height from stream (seed, r, i, 2). Jump
// heights are Delta * z_i with z_i standard normal, so changing Delta
// leaves everything else in the replication untouched.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "panel_cpd/error.hpp"
#include "panel_cpd/panel.hpp"
#include "panel_cpd/parallel.hpp"
#include "panel_cpd/rng.hpp"
#include "panel_cpd/testing.hpp"

namespace panel_cpd {

struct Innovation {
  enum class Kind { Normal, StudentT };
  Kind kind = Kind::Normal;
  double df = 0.0;

  static Innovation normal() { return {}; }
  static Innovation student_t(double df) { return {Kind::StudentT, df}; }

  friend bool operator==(const Innovation&, const Innovation&) = default;
};

/// "normal" or "t:<df>".
inline Innovation parse_innovation(const std::string& text) {
  if (text == "normal") return Innovation::normal();
  if (text.rfind("t:", 0) == 0) {
    try {
      std::size_t used = 0;
      const double df = std::stod(text.substr(2), &used);
      if (used == text.size() - 2 && df > 0.0) return Innovation::student_t(df);
    } catch (const std::exception&) {
    }
  }
  throw UsageError("innovation must be 'normal' or 't:<df>' with df > 0, got '" + text + "'");
}

inline std::string to_string(const Innovation& innovation) {
  if (innovation.kind == Innovation::Kind::Normal) return "normal";
  std::ostringstream os;
  os << "t:" << innovation.df;
  return os.str();
}

/// X_t = rho X_{t-1} + a_t, started at zero and run for burn_in steps
/// before the recorded T. Student-t innovations are raw draws (t_1 has no
/// variance to standardize).
struct DgpConfig {
  std::size_t individuals = 100;
  std::size_t periods = 200;
  double rho = 0.0;
  Innovation innovation{};
  std::size_t burn_in = 200;
  std::uint64_t seed = 1;
};

/// Level shift delta_i ~ N(0, delta_sd^2) added to every period after t0.
struct BreakConfig {
  std::size_t t0 = 1;
  double delta_sd = 0.0;
};

inline void validate(const DgpConfig& dgp) {
  if (dgp.individuals < 1) throw UsageError("DGP: need at least one individual");
  if (dgp.periods < 2) throw UsageError("DGP: need at least two periods");
  if (!(std::abs(dgp.rho) < 1.0)) throw UsageError("DGP: |rho| must be < 1");
  if (dgp.innovation.kind == Innovation::Kind::StudentT && !(dgp.innovation.df > 0.0)) {
    throw UsageError("DGP: Student-t degrees of freedom must be positive");
  }
}

inline void validate(const BreakConfig& brk, std::size_t periods) {
  if (brk.t0 < 1 || brk.t0 > periods - 1) {
    throw UsageError("break: t0 must lie in [1, T-1], got " + std::to_string(brk.t0));
  }
  if (!(brk.delta_sd >= 0.0)) throw UsageError("break: Delta must be nonnegative");
}

/// Panel for replication `replication` of the DGP.
inline Panel generate_panel(const DgpConfig& dgp, const std::optional<BreakConfig>& brk,
                            std::uint64_t replication = 0) {
  validate(dgp);
  if (brk) validate(*brk, dgp.periods);
  const std::size_t N = dgp.individuals;
  const std::size_t T = dgp.periods;
  std::vector<double> data(N * T);

  for (std::size_t i = 0; i < N; ++i) {
    rng::Xoshiro256 gen(rng::derive_seed(dgp.seed, {replication, i, 1}));
    rng::NormalSampler normal;
    auto draw = [&] {
      return dgp.innovation.kind == Innovation::Kind::Normal
                 ? normal(gen)
                 : rng::student_t_variate(dgp.innovation.df, gen, normal);
    };
    double x = 0.0;
    for (std::size_t t = 0; t < dgp.burn_in; ++t) x = dgp.rho * x + draw();
    double* row = data.data() + i * T;
    for (std::size_t t = 0; t < T; ++t) {
      x = dgp.rho * x + draw();
      row[t] = x;
    }
    if (brk && brk->delta_sd > 0.0) {
      rng::Xoshiro256 jump_gen(rng::derive_seed(dgp.seed, {replication, i, 2}));
      rng::NormalSampler jump_normal;
      const double jump = brk->delta_sd * jump_normal(jump_gen);
      for (std::size_t t = brk->t0; t < T; ++t) row[t] += jump;
    }
  }
  return Panel(N, T, std::move(data));
}

struct NamedConfig {
  std::string name;
  TestConfig config;
};

/// The robust / non-robust pair compared in the experiments.
inline std::vector<NamedConfig> default_configs() {
  return {{"non-robust", TestConfig::non_robust()}, {"robust", TestConfig::robust()}};
}

struct RateEntry {
  std::string config;
  std::size_t individuals = 0;
  std::size_t periods = 0;
  double rho = 0.0;
  std::string innovation;
  double delta = 0.0;
  double rate = 0.0;
  std::size_t rejections = 0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const RateEntry&, const RateEntry&) = default;
};

struct ExperimentReport {
  std::string kind;  // "size" or "power"
  std::vector<RateEntry> entries;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;

  /// Rate for a config at one cell; throws if absent.
  double rate(const std::string& config, std::size_t n, std::size_t t, double delta = 0.0) const {
    for (const auto& e : entries) {
      if (e.config == config && e.individuals == n && e.periods == t &&
          std::abs(e.delta - delta) < 1e-12) {
        return e.rate;
      }
    }
    throw UsageError("report has no entry for " + config + " at N=" + std::to_string(n) +
                     ", T=" + std::to_string(t));
  }
};

namespace detail {

// Rejection counts per config over R replications of one DGP cell. All
// configs see the same panel in each replication.
inline std::vector<std::size_t> count_rejections(const DgpConfig& dgp,
                                                 const std::optional<BreakConfig>& brk,
                                                 const std::vector<NamedConfig>& configs,
                                                 std::size_t replications, unsigned threads) {
  std::vector<unsigned char> rejected(replications * configs.size(), 0);
  parallel_for(replications, threads, [&](std::size_t r) {
    const Panel panel = generate_panel(dgp, brk, r);
    for (std::size_t c = 0; c < configs.size(); ++c) {
      TestConfig cfg = configs[c].config;
      cfg.threads = 1;
      rejected[r * configs.size() + c] = run_test(panel, cfg).reject ? 1 : 0;
    }
  });
  std::vector<std::size_t> counts(configs.size(), 0);
  for (std::size_t r = 0; r < replications; ++r) {
    for (std::size_t c = 0; c < configs.size(); ++c) counts[c] += rejected[r * configs.size() + c];
  }
  return counts;
}

}  // namespace detail

struct SizeCell {
  std::size_t individuals = 0;
  std::size_t periods = 0;
};

/// Empirical size on each (N, T) cell. Cells use independent streams
/// derived from (seed, N, T).
inline ExperimentReport empirical_size(const std::vector<SizeCell>& cells, double rho,
                                       Innovation innovation,
                                       const std::vector<NamedConfig>& configs,
                                       std::size_t replications, std::uint64_t seed,
                                       unsigned threads = 1, std::size_t burn_in = 200) {
  if (replications < 100) throw UsageError("empirical_size: need at least 100 replications");
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.kind = "size";
  report.replications = replications;
  report.seed = seed;
  for (const auto& cell : cells) {
    DgpConfig dgp{cell.individuals, cell.periods, rho, innovation, burn_in,
                  rng::derive_seed(seed, {cell.individuals, cell.periods})};
    const auto counts = detail::count_rejections(dgp, std::nullopt, configs, replications, threads);
    for (std::size_t c = 0; c < configs.size(); ++c) {
      report.entries.push_back({configs[c].name, cell.individuals, cell.periods, rho,
                                to_string(innovation), 0.0,
                                static_cast<double>(counts[c]) / static_cast<double>(replications),
                                counts[c], replications, dgp.seed});
    }
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

/// Rejection rate per Delta. Every Delta reuses the same replication
/// streams, so the curves are paired across Delta and across configs.
inline ExperimentReport power_curve(const DgpConfig& dgp, std::size_t t0,
                                    const std::vector<double>& deltas,
                                    const std::vector<NamedConfig>& configs,
                                    std::size_t replications, unsigned threads = 1) {
  validate(dgp);
  if (replications < 1) throw UsageError("power_curve: need at least one replication");
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.kind = "power";
  report.replications = replications;
  report.seed = dgp.seed;
  for (double delta : deltas) {
    const BreakConfig brk{t0, delta};
    validate(brk, dgp.periods);
    const auto counts = detail::count_rejections(dgp, brk, configs, replications, threads);
    for (std::size_t c = 0; c < configs.size(); ++c) {
      report.entries.push_back({configs[c].name, dgp.individuals, dgp.periods, dgp.rho,
                                to_string(dgp.innovation), delta,
                                static_cast<double>(counts[c]) / static_cast<double>(replications),
                                counts[c], replications, dgp.seed});
    }
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

/// Parses "lo:hi:step" into lo, lo+step, ..., hi (inclusive within step/1000).
inline std::vector<double> parse_grid(const std::string& text) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  if (!(is >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(is >> std::ws).eof() ||
      !(step > 0.0) || hi < lo) {
    throw UsageError("grid must be 'lo:hi:step' with step > 0 and hi >= lo, got '" + text + "'");
  }
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-3));
  for (std::size_t j = 0; j <= count; ++j) out.push_back(lo + static_cast<double>(j) * step);
  return out;
}

/// Published empirical sizes (1000 runs, alpha = 0.05) for reference
/// printing: rows N = 50..800, columns T = 50..800.
struct SizeTableReference {
  double rho = 0.0;
  Innovation innovation{};
  double non_robust[5][5];
  double robust[5][5];
};

inline constexpr std::size_t kSizeGrid[5] = {50, 100, 200, 400, 800};

inline SizeTableReference size_table_reference(int table) {
  switch (table) {
    case 2:
      return {0.0, Innovation::normal(),
              {{0.33, 0.13, 0.07, 0.07, 0.04}, {0.52, 0.14, 0.06, 0.07, 0.06},
               {0.77, 0.21, 0.11, 0.07, 0.04}, {0.97, 0.40, 0.18, 0.08, 0.08},
               {1.00, 0.65, 0.28, 0.13, 0.06}},
              {{0.33, 0.14, 0.07, 0.06, 0.04}, {0.55, 0.15, 0.07, 0.06, 0.06},
               {0.79, 0.22, 0.11, 0.08, 0.04}, {0.97, 0.41, 0.17, 0.07, 0.08},
               {1.00, 0.66, 0.28, 0.13, 0.07}}};
    case 3:
      return {0.0, Innovation::student_t(3.0),
              {{0.30, 0.11, 0.05, 0.08, 0.06}, {0.47, 0.15, 0.08, 0.06, 0.06},
               {0.74, 0.19, 0.10, 0.06, 0.05}, {0.97, 0.36, 0.12, 0.08, 0.06},
               {1.00, 0.65, 0.23, 0.14, 0.08}},
              {{0.34, 0.10, 0.05, 0.08, 0.06}, {0.54, 0.16, 0.08, 0.06, 0.06},
               {0.77, 0.25, 0.11, 0.07, 0.06}, {0.97, 0.41, 0.15, 0.09, 0.06},
               {1.00, 0.68, 0.26, 0.15, 0.08}}};
    case 4:
      return {0.5, Innovation::normal(),
              {{0.07, 0.06, 0.05, 0.04, 0.03}, {0.12, 0.07, 0.04, 0.04, 0.05},
               {0.24, 0.10, 0.05, 0.04, 0.04}, {0.53, 0.16, 0.07, 0.06, 0.04},
               {0.90, 0.36, 0.13, 0.07, 0.05}},
              {{0.08, 0.05, 0.05, 0.05, 0.03}, {0.12, 0.07, 0.04, 0.04, 0.06},
               {0.26, 0.11, 0.05, 0.05, 0.04}, {0.54, 0.17, 0.07, 0.05, 0.04},
               {0.90, 0.37, 0.13, 0.07, 0.05}}};
    default:
      throw UsageError("size table must be 2, 3 or 4");
  }
}

}  // namespace panel_cpd
