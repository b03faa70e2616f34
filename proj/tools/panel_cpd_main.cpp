// panel-cpd: command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "panel_cpd/panel_cpd.hpp"

namespace {

using namespace panel_cpd;

struct GlobalOptions {
  std::uint64_t seed = 20240101;
  unsigned threads = 0;
  std::string output;
  bool quiet = false;
};

void add_global_flags(CLI::App& cmd, GlobalOptions& g) {
  cmd.add_option("--seed", g.seed, "Master RNG seed")->capture_default_str();
  cmd.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();
  cmd.add_option("--output", g.output, "Machine-readable output (.json => JSON, else CSV)");
  cmd.add_flag("--quiet", g.quiet, "Suppress the human-readable summary");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("cannot parse number '" + item + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : parse_list(text)) {
    if (!(v >= 1.0) || v != std::floor(v)) throw UsageError("expected positive integers in '" + text + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// ---- test ----------------------------------------------------------------

struct TestOptions {
  std::string input;
  std::string psi = "smooth-huber:1.345";
  std::string standardize = "median-mad";
  std::string standardize_file;
  double mad_constant = kMadGaussian;
  std::string kernel = "flat-top";
  double bandwidth_exp = 0.4;
  std::size_t bandwidth = 0;
  double lrv_floor = 1e-12;
  double alpha = 0.05;
  std::string statistic = "sup";
  std::optional<double> critical_value;
  std::string quantiles;
  std::size_t cv_paths = 100000;
  std::size_t grid = 2001;
  std::string layout = "wide";
  std::string delimiter = ",";
  bool header = false;
  bool id_column = false;
  std::string plot_data;
};

Standardization parse_standardization(const TestOptions& o, std::size_t n_individuals) {
  if (!o.standardize_file.empty()) {
    io::PanelFileSpec spec;
    spec.delimiter = o.delimiter.front();
    const Panel params = io::read_panel(o.standardize_file, spec);
    if (params.periods() != 2) {
      throw DataError(o.standardize_file + ": expected two columns (mu, sigma)");
    }
    if (params.individuals() != n_individuals) {
      throw DataError(o.standardize_file + ": has " + std::to_string(params.individuals()) +
                      " rows for " + std::to_string(n_individuals) + " individuals");
    }
    std::vector<StandardizedSeriesParams> list;
    for (std::size_t i = 0; i < params.individuals(); ++i) list.push_back({params(i, 0), params(i, 1)});
    return Standardization::per_individual_fixed(std::move(list));
  }
  if (o.standardize == "median-mad") return Standardization::median_mad(o.mad_constant);
  if (o.standardize.rfind("fixed:", 0) == 0) {
    std::string rest = o.standardize.substr(6);
    std::replace(rest.begin(), rest.end(), ':', ',');
    const auto v = parse_list(rest);
    if (v.size() != 2 || !(v[1] > 0.0)) throw UsageError("--standardize fixed:MU:SIGMA needs SIGMA > 0");
    return Standardization::fixed(v[0], v[1]);
  }
  throw UsageError("--standardize must be 'median-mad' or 'fixed:MU:SIGMA'");
}

int run_test_command(const TestOptions& o, const GlobalOptions& g) {
  if (o.delimiter.size() != 1) throw UsageError("--delimiter must be a single character");
  io::PanelFileSpec spec;
  spec.layout = o.layout == "long" ? io::PanelFileSpec::Layout::Long : io::PanelFileSpec::Layout::Wide;
  spec.delimiter = o.delimiter.front();
  spec.header = o.header;
  spec.id_column = o.id_column;

  TestConfig config;
  config.psi = parse_psi(o.psi);
  config.lrv.kernel = parse_kernel(o.kernel);
  config.lrv.bandwidth = o.bandwidth > 0 ? BandwidthRule::fixed_lags(o.bandwidth)
                                         : BandwidthRule::power_law(o.bandwidth_exp);
  config.lrv.degeneracy_floor = o.lrv_floor;
  config.alpha = o.alpha;
  config.statistic = o.statistic == "integral" ? StatisticKind::Integral : StatisticKind::Sup;
  config.integral_critical_value = o.critical_value;
  config.threads = g.threads;
  validate(config);

  const Panel panel = io::read_panel(o.input, spec);
  config.standardization = parse_standardization(o, panel.individuals());

  if (!o.quantiles.empty()) {
    config.critical_values =
        std::make_shared<CriticalValues>(io::quantile_table_from_json(io::read_json(o.quantiles)));
  }
  if (config.statistic == StatisticKind::Sup) {
    const CriticalValues& cv = config.critical_values ? *config.critical_values : CriticalValues{};
    bool covered = true;
    try {
      cv.critical_value(config.alpha);
    } catch (const UsageError&) {
      covered = false;
    }
    if (!covered) {
      if (!g.quiet) {
        std::cerr << "alpha " << config.alpha << " not tabulated; simulating " << o.cv_paths
                  << " paths of the limit process\n";
      }
      config.critical_values = std::make_shared<CriticalValues>(
          simulate_sup_samples(o.cv_paths, {o.grid, g.seed}, g.threads));
    }
  }

  PanelProcess process;
  const TestResult result = run_test(panel, config, &process);

  if (!g.output.empty()) io::write_result(result, io::format_for(g.output), g.output);
  if (!o.plot_data.empty()) io::emit_plot_data(process, o.plot_data);
  if (!g.quiet) {
    std::cout << "panel: N = " << result.individuals << " (effective " << result.effective_individuals
              << "), T = " << result.periods << ", bandwidth = " << result.bandwidth << "\n";
    std::cout << to_string(result.statistic) << " statistic = " << fmt(result.statistic_value)
              << ", critical value = "
              << (std::isfinite(result.critical_value) ? fmt(result.critical_value) : "n/a")
              << ", p-value = " << (result.p_value ? fmt(*result.p_value) : "n/a") << "\n";
    std::cout << "decision at alpha = " << result.alpha << ": "
              << (result.reject ? "reject (change detected)" : "do not reject") << ", argmax split k = "
              << result.argmax_split << "\n";
  }
  return 0;
}

// ---- simulate-quantiles ----------------------------------------------------

struct QuantileOptions {
  std::size_t paths = 200000;
  std::size_t grid = 2001;
  std::string alphas = "0.9,0.95,0.975,0.99,0.995";
};

int run_quantiles_command(const QuantileOptions& o, const GlobalOptions& g) {
  const QuantileTable table =
      estimate_quantiles(o.paths, parse_list(o.alphas), {o.grid, g.seed}, g.threads);
  if (!g.output.empty()) io::write_result(table, io::format_for(g.output), g.output);
  if (!g.quiet) {
    const QuantileTable ref = QuantileTable::builtin();
    std::cout << "sup |Gamma| quantiles: " << o.paths << " paths, " << o.grid << " grid points, seed "
              << g.seed << "\n";
    std::cout << "level      q        reference\n";
    for (const auto& e : table.entries) {
      const auto r = ref.at(e.level);
      std::cout << std::left << std::setw(10) << e.level << " " << fmt(e.q) << "   "
                << (r ? fmt(*r, 3) : "-") << "\n";
    }
  }
  return 0;
}

// ---- reproduce -------------------------------------------------------------

struct ReproduceOptions {
  int table = 2;
  std::size_t reps = 1000;
  std::string n_grid = "50,100,200,400,800";
  std::string t_grid = "50,100,200,400,800";
};

int run_reproduce_command(const ReproduceOptions& o, const GlobalOptions& g) {
  const SizeTableReference ref = size_table_reference(o.table);
  const auto ns = parse_size_list(o.n_grid);
  const auto ts = parse_size_list(o.t_grid);
  std::vector<SizeCell> cells;
  for (auto n : ns)
    for (auto t : ts) cells.push_back({n, t});
  const auto configs = default_configs();
  const ExperimentReport report =
      empirical_size(cells, ref.rho, ref.innovation, configs, o.reps, g.seed, g.threads);
  if (!g.output.empty()) io::write_result(report, io::format_for(g.output), g.output);
  if (!g.quiet) {
    auto ref_value = [&](const std::string& config, std::size_t n, std::size_t t) -> std::string {
      for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b)
          if (kSizeGrid[a] == n && kSizeGrid[b] == t)
            return fmt(config == "robust" ? ref.robust[a][b] : ref.non_robust[a][b], 2);
      return "  - ";
    };
    std::cout << "Empirical size, rho = " << ref.rho << ", " << to_string(ref.innovation)
              << " innovations, alpha = 0.05, " << o.reps << " replications (reference in brackets)\n";
    for (const auto& c : configs) {
      std::cout << "\n" << c.name << " test\nN \\ T";
      for (auto t : ts) std::cout << std::setw(14) << t;
      std::cout << "\n";
      for (auto n : ns) {
        std::cout << std::left << std::setw(5) << n << std::right;
        for (auto t : ts) {
          std::cout << std::setw(14) << (fmt(report.rate(c.name, n, t), 3) + " [" + ref_value(c.name, n, t) + "]");
        }
        std::cout << "\n";
      }
    }
    std::cout << "\nruntime " << fmt(report.runtime_seconds, 1) << " s\n";
  }
  return 0;
}

// ---- power -----------------------------------------------------------------

struct PowerOptions {
  std::string innovation = "normal";
  std::string delta_grid = "0:0.2:0.025";
  std::size_t reps = 1000;
  double rho = 0.25;
  std::size_t n = 200;
  std::size_t t = 400;
  std::size_t t0 = 200;
  std::size_t burn_in = 200;
  std::string plot_data;
};

int run_power_command(const PowerOptions& o, const GlobalOptions& g) {
  DgpConfig dgp{o.n, o.t, o.rho, parse_innovation(o.innovation), o.burn_in, g.seed};
  const auto deltas = parse_grid(o.delta_grid);
  const ExperimentReport report = power_curve(dgp, o.t0, deltas, default_configs(), o.reps, g.threads);
  if (!g.output.empty()) io::write_result(report, io::format_for(g.output), g.output);
  if (!o.plot_data.empty()) io::emit_plot_data(report, o.plot_data);
  if (!g.quiet) {
    std::cout << "Empirical power, rho = " << o.rho << ", N = " << o.n << ", T = " << o.t
              << ", break at t0 = " << o.t0 << ", " << o.innovation << " innovations, " << o.reps
              << " replications\n";
    std::cout << "delta     non-robust  robust\n";
    for (double d : deltas) {
      std::cout << std::left << std::setw(10) << fmt(d, 3) << fmt(report.rate("non-robust", o.n, o.t, d), 3)
                << "       " << fmt(report.rate("robust", o.n, o.t, d), 3) << "\n";
    }
    std::cout << "runtime " << fmt(report.runtime_seconds, 1) << " s\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust panel CUSUM change-point test"};
  app.require_subcommand(1);
  GlobalOptions global;

  TestOptions topt;
  auto* test = app.add_subcommand("test", "Test a panel for a common change in level");
  add_global_flags(*test, global);
  test->add_option("--input", topt.input, "Panel CSV file")->required();
  test->add_option("--psi", topt.psi,
                   "identity | huber[:k] | smooth-huber[:k[:delta]] | bisquare[:k]")
      ->capture_default_str();
  test->add_option("--standardize", topt.standardize, "median-mad | fixed:MU:SIGMA")
      ->capture_default_str();
  test->add_option("--standardize-file", topt.standardize_file,
                   "CSV of per-individual mu,sigma (overrides --standardize)");
  test->add_option("--mad-constant", topt.mad_constant, "MAD consistency constant c_F")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  test->add_option("--kernel", topt.kernel, "flat-top | parzen | daniell | bartlett")
      ->capture_default_str()
      ->check(CLI::IsMember({"flat-top", "parzen", "daniell", "bartlett"}));
  auto* bexp = test->add_option("--bandwidth-exp", topt.bandwidth_exp, "Bandwidth floor(T^exp)")
                   ->capture_default_str()
                   ->check(CLI::Range(0.0, 1.0));
  test->add_option("--bandwidth", topt.bandwidth, "Fixed bandwidth (lags)")->excludes(bexp)->check(CLI::PositiveNumber);
  test->add_option("--lrv-floor", topt.lrv_floor, "Degeneracy floor for the long-run variance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  test->add_option("--alpha", topt.alpha, "Significance level")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  test->add_option("--statistic", topt.statistic, "sup | integral")
      ->capture_default_str()
      ->check(CLI::IsMember({"sup", "integral"}));
  test->add_option("--critical-value", topt.critical_value,
                   "Critical value for the integral statistic (none is shipped)");
  test->add_option("--quantiles", topt.quantiles, "Quantile table JSON (default: built-in table)");
  test->add_option("--cv-paths", topt.cv_paths, "Paths simulated when alpha is not tabulated")
      ->capture_default_str();
  test->add_option("--grid", topt.grid, "Grid points for simulated critical values")->capture_default_str();
  test->add_option("--layout", topt.layout, "wide | long")
      ->capture_default_str()
      ->check(CLI::IsMember({"wide", "long"}));
  test->add_option("--delimiter", topt.delimiter, "Field delimiter")->capture_default_str();
  test->add_flag("--header", topt.header, "First line is a header");
  test->add_flag("--id-column", topt.id_column, "First column holds individual ids (wide layout)");
  test->add_option("--plot-data", topt.plot_data, "Write W(k/T) as x,value CSV");

  QuantileOptions qopt;
  auto* quant = app.add_subcommand("simulate-quantiles", "Simulate quantiles of sup |Gamma|");
  add_global_flags(*quant, global);
  quant->add_option("--paths", qopt.paths, "Number of simulated paths (>= 1000)")->capture_default_str();
  quant->add_option("--grid", qopt.grid, "Grid points on [0, 1]")->capture_default_str();
  quant->add_option("--alphas", qopt.alphas, "Comma-separated quantile levels")->capture_default_str();

  ReproduceOptions ropt;
  auto* repro = app.add_subcommand("reproduce", "Empirical size table under the null");
  add_global_flags(*repro, global);
  repro->add_option("--table", ropt.table, "2: rho=0 normal, 3: rho=0 t3, 4: rho=0.5 normal")
      ->capture_default_str()
      ->check(CLI::IsMember({2, 3, 4}));
  repro->add_option("--reps", ropt.reps, "Replications per cell")->capture_default_str();
  repro->add_option("--n-grid", ropt.n_grid, "Comma-separated N values")->capture_default_str();
  repro->add_option("--t-grid", ropt.t_grid, "Comma-separated T values")->capture_default_str();

  PowerOptions popt;
  auto* power = app.add_subcommand("power", "Empirical power curve over jump-height scales");
  add_global_flags(*power, global);
  power->add_option("--innovation", popt.innovation, "normal | t:<df>")->capture_default_str();
  power->add_option("--delta-grid", popt.delta_grid, "lo:hi:step")->capture_default_str();
  power->add_option("--reps", popt.reps, "Replications per delta")->capture_default_str();
  power->add_option("--rho", popt.rho, "AR(1) coefficient")->capture_default_str();
  power->add_option("--n", popt.n, "Individuals")->capture_default_str();
  power->add_option("--t", popt.t, "Time points")->capture_default_str();
  power->add_option("--t0", popt.t0, "Break time")->capture_default_str();
  power->add_option("--burn-in", popt.burn_in, "AR(1) burn-in steps")->capture_default_str();
  power->add_option("--plot-data", popt.plot_data, "Write delta,rate-per-config CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*test) return run_test_command(topt, global);
    if (*quant) return run_quantiles_command(qopt, global);
    if (*repro) return run_reproduce_command(ropt, global);
    if (*power) return run_power_command(popt, global);
  } catch (const Error& e) {
    std::cerr << "panel-cpd: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "panel-cpd: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
