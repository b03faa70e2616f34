#pragma once

// Panel ingestion and result serialization.
//
// Wide CSV: one individual per line, T numeric columns, optional header
// line and optional leading id column. Long CSV: (id, t, value) triplets
// forming a complete N x T grid; individuals keep their order of first
// appearance and time points are sorted numerically.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "panel_cpd/cusum.hpp"
#include "panel_cpd/error.hpp"
#include "panel_cpd/limit_process.hpp"
#include "panel_cpd/montecarlo.hpp"
#include "panel_cpd/panel.hpp"
#include "panel_cpd/testing.hpp"

namespace panel_cpd::io {

struct PanelFileSpec {
  enum class Layout { Wide, Long };
  Layout layout = Layout::Wide;
  char delimiter = ',';
  bool header = false;
  bool id_column = false;  // wide layout only
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delim, start);
    cells.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

inline double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  if (cell.empty()) {
    throw DataError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                    ": missing value");
  }
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw DataError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                    ": non-numeric value '" + std::string(cell) + "'");
  }
  return v;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  return out;
}

inline void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw DataError("failed writing '" + path + "'");
}

}  // namespace detail

/// Parses panel text; `origin` labels error messages.
inline Panel parse_panel(std::istream& in, const PanelFileSpec& spec,
                         const std::string& origin = "input") {
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = spec.header;
  auto context = [&](const std::string& msg) { return origin + ": " + msg; };

  if (spec.layout == PanelFileSpec::Layout::Wide) {
    std::vector<double> data;
    std::size_t width = 0;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (detail::trim(line).empty()) continue;
      if (header_pending) {
        header_pending = false;
        continue;
      }
      auto cells = detail::split(line, spec.delimiter);
      std::size_t first = spec.id_column ? 1 : 0;
      if (cells.size() <= first) {
        throw DataError(context("row " + std::to_string(rows + 1) + " (line " +
                                std::to_string(line_no) + ") has no values"));
      }
      const std::size_t n_values = cells.size() - first;
      if (rows == 0) width = n_values;
      if (n_values != width) {
        throw DataError(context("row " + std::to_string(rows + 1) + " (line " +
                                std::to_string(line_no) + ") has " + std::to_string(n_values) +
                                " values, expected " + std::to_string(width)));
      }
      ++rows;
      for (std::size_t c = first; c < cells.size(); ++c) {
        try {
          data.push_back(detail::parse_cell(cells[c], rows, c + 1));
        } catch (const DataError& e) {
          throw DataError(context(e.what()));
        }
      }
    }
    if (rows == 0) throw DataError(context("no data rows"));
    try {
      return Panel(rows, width, std::move(data));
    } catch (const DataError& e) {
      throw DataError(context(e.what()));
    }
  }

  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> id_index;
  std::map<double, std::size_t> times;
  struct Triplet {
    std::size_t id;
    double t;
    double value;
    std::size_t line;
  };
  std::vector<Triplet> triplets;
  std::size_t record = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    ++record;
    auto cells = detail::split(line, spec.delimiter);
    if (cells.size() != 3) {
      throw DataError(context("record " + std::to_string(record) + " (line " +
                              std::to_string(line_no) + ") must have 3 fields (id, t, value), has " +
                              std::to_string(cells.size())));
    }
    std::string id(cells[0]);
    auto [it, inserted] = id_index.try_emplace(id, ids.size());
    if (inserted) ids.push_back(id);
    try {
      const double t = detail::parse_cell(cells[1], record, 2);
      const double v = detail::parse_cell(cells[2], record, 3);
      times.try_emplace(t, 0);
      triplets.push_back({it->second, t, v, line_no});
    } catch (const DataError& e) {
      throw DataError(context(e.what()));
    }
  }
  if (triplets.empty()) throw DataError(context("no data records"));
  std::size_t col = 0;
  for (auto& [t, idx] : times) idx = col++;
  const std::size_t N = ids.size();
  const std::size_t T = times.size();
  std::vector<double> data(N * T, 0.0);
  std::vector<unsigned char> seen(N * T, 0);
  for (const auto& tr : triplets) {
    const std::size_t cell = tr.id * T + times.at(tr.t);
    if (seen[cell]) {
      throw DataError(context("duplicate observation for id '" + ids[tr.id] + "' at t = " +
                              detail::format_double(tr.t) + " (line " + std::to_string(tr.line) +
                              ")"));
    }
    seen[cell] = 1;
    data[cell] = tr.value;
  }
  for (std::size_t i = 0; i < N; ++i) {
    for (const auto& [t, j] : times) {
      if (!seen[i * T + j]) {
        throw DataError(context("incomplete long panel: id '" + ids[i] + "' has no value at t = " +
                                detail::format_double(t)));
      }
    }
  }
  try {
    return Panel(N, T, std::move(data));
  } catch (const DataError& e) {
    throw DataError(context(e.what()));
  }
}

inline Panel read_panel(const std::string& path, const PanelFileSpec& spec = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open panel file '" + path + "'");
  return parse_panel(in, spec, path);
}

/// Wide CSV, one individual per line, %.17g values.
inline void write_panel(const Panel& panel, const std::string& path, char delimiter = ',') {
  auto out = detail::open_output(path);
  for (std::size_t i = 0; i < panel.individuals(); ++i) {
    const auto row = panel.row(i);
    for (std::size_t t = 0; t < row.size(); ++t) {
      if (t) out << delimiter;
      out << detail::format_double(row[t]);
    }
    out << '\n';
  }
  detail::finish(out, path);
}

// ---- JSON ----------------------------------------------------------------

inline nlohmann::json to_json(const TestResult& r) {
  nlohmann::json j;
  j["statistic"] = to_string(r.statistic);
  j["statistic_value"] = r.statistic_value;
  j["critical_value"] = std::isfinite(r.critical_value) ? nlohmann::json(r.critical_value)
                                                        : nlohmann::json(nullptr);
  j["p_value"] = r.p_value ? nlohmann::json(*r.p_value) : nlohmann::json(nullptr);
  j["reject"] = r.reject;
  j["argmax_split"] = r.argmax_split;
  j["alpha"] = r.alpha;
  j["individuals"] = r.individuals;
  j["periods"] = r.periods;
  j["effective_individuals"] = r.effective_individuals;
  j["bandwidth"] = r.bandwidth;
  auto& list = j["per_individual"] = nlohmann::json::array();
  for (const auto& d : r.per_individual) {
    list.push_back({{"mu_hat", d.mu_hat},
                    {"sigma_hat", d.sigma_hat},
                    {"v_squared", d.v_squared},
                    {"floored", d.floored},
                    {"skipped", d.skipped},
                    {"skip_reason", d.skip_reason}});
  }
  return j;
}

inline TestResult test_result_from_json(const nlohmann::json& j) {
  try {
    TestResult r;
    r.statistic = j.at("statistic").get<std::string>() == "integral" ? StatisticKind::Integral
                                                                      : StatisticKind::Sup;
    r.statistic_value = j.at("statistic_value").get<double>();
    r.critical_value = j.at("critical_value").is_null()
                           ? std::numeric_limits<double>::quiet_NaN()
                           : j.at("critical_value").get<double>();
    if (!j.at("p_value").is_null()) r.p_value = j.at("p_value").get<double>();
    r.reject = j.at("reject").get<bool>();
    r.argmax_split = j.at("argmax_split").get<std::size_t>();
    r.alpha = j.at("alpha").get<double>();
    r.individuals = j.at("individuals").get<std::size_t>();
    r.periods = j.at("periods").get<std::size_t>();
    r.effective_individuals = j.at("effective_individuals").get<std::size_t>();
    r.bandwidth = j.at("bandwidth").get<std::size_t>();
    for (const auto& d : j.at("per_individual")) {
      r.per_individual.push_back({d.at("mu_hat").get<double>(), d.at("sigma_hat").get<double>(),
                                  d.at("v_squared").get<double>(), d.at("floored").get<bool>(),
                                  d.at("skipped").get<bool>(),
                                  d.at("skip_reason").get<std::string>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed test result JSON: ") + e.what());
  }
}

inline nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["kind"] = report.kind;
  j["replications"] = report.replications;
  j["seed"] = report.seed;
  auto& list = j["entries"] = nlohmann::json::array();
  for (const auto& e : report.entries) {
    list.push_back({{"config", e.config},
                    {"N", e.individuals},
                    {"T", e.periods},
                    {"rho", e.rho},
                    {"innovation", e.innovation},
                    {"delta", e.delta},
                    {"rate", e.rate},
                    {"rejections", e.rejections},
                    {"reps", e.replications},
                    {"seed", e.seed}});
  }
  return j;
}

inline ExperimentReport experiment_report_from_json(const nlohmann::json& j) {
  try {
    ExperimentReport r;
    r.kind = j.at("kind").get<std::string>();
    r.replications = j.at("replications").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("entries")) {
      r.entries.push_back({e.at("config").get<std::string>(), e.at("N").get<std::size_t>(),
                           e.at("T").get<std::size_t>(), e.at("rho").get<double>(),
                           e.at("innovation").get<std::string>(), e.at("delta").get<double>(),
                           e.at("rate").get<double>(), e.at("rejections").get<std::size_t>(),
                           e.at("reps").get<std::size_t>(), e.at("seed").get<std::uint64_t>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed experiment report JSON: ") + e.what());
  }
}

inline nlohmann::json to_json(const QuantileTable& table) {
  nlohmann::json j;
  j["format"] = "panel-cpd-quantiles";
  j["version"] = 1;
  j["functional"] = "sup_abs_gamma";
  j["source"] = table.source;
  j["paths"] = table.paths;
  j["grid_points"] = table.grid_points;
  j["seed"] = table.seed;
  auto& list = j["entries"] = nlohmann::json::array();
  for (const auto& e : table.entries) list.push_back({{"level", e.level}, {"q", e.q}});
  return j;
}

inline QuantileTable quantile_table_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1) throw DataError("unsupported quantile table version");
    QuantileTable t;
    t.source = j.at("source").get<std::string>();
    t.paths = j.at("paths").get<std::size_t>();
    t.grid_points = j.at("grid_points").get<std::size_t>();
    t.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("entries")) {
      t.entries.push_back({e.at("level").get<double>(), e.at("q").get<double>()});
    }
    validate(t);
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed quantile table JSON: ") + e.what());
  }
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
  auto out = detail::open_output(path);
  out << j.dump(2) << '\n';
  detail::finish(out, path);
}

// ---- CSV -----------------------------------------------------------------

/// Columns: config,N,T,delta,rate,reps,seed.
inline void write_report_csv(const ExperimentReport& report, std::ostream& out) {
  out << "config,N,T,delta,rate,reps,seed\n";
  for (const auto& e : report.entries) {
    out << e.config << ',' << e.individuals << ',' << e.periods << ','
        << detail::format_double(e.delta) << ',' << detail::format_double(e.rate) << ','
        << e.replications << ',' << e.seed << '\n';
  }
}

/// Single-row CSV of the headline fields plus one row per individual.
inline void write_result_csv(const TestResult& r, std::ostream& out) {
  out << "statistic,statistic_value,critical_value,p_value,reject,argmax_split,alpha,"
         "individuals,periods,effective_individuals,bandwidth\n";
  out << to_string(r.statistic) << ',' << detail::format_double(r.statistic_value) << ','
      << (std::isfinite(r.critical_value) ? detail::format_double(r.critical_value) : "") << ','
      << (r.p_value ? detail::format_double(*r.p_value) : "") << ',' << (r.reject ? 1 : 0) << ','
      << r.argmax_split << ',' << detail::format_double(r.alpha) << ',' << r.individuals << ','
      << r.periods << ',' << r.effective_individuals << ',' << r.bandwidth << '\n';
  out << "individual,mu_hat,sigma_hat,v_squared,floored,skipped,skip_reason\n";
  for (std::size_t i = 0; i < r.per_individual.size(); ++i) {
    const auto& d = r.per_individual[i];
    out << i + 1 << ',' << detail::format_double(d.mu_hat) << ','
        << detail::format_double(d.sigma_hat) << ',' << detail::format_double(d.v_squared) << ','
        << (d.floored ? 1 : 0) << ',' << (d.skipped ? 1 : 0) << ',' << d.skip_reason << '\n';
  }
}

/// Columns: level,q.
inline void write_quantiles_csv(const QuantileTable& table, std::ostream& out) {
  out << "level,q\n";
  for (const auto& e : table.entries) {
    out << detail::format_double(e.level) << ',' << detail::format_double(e.q) << '\n';
  }
}

enum class Format { Json, Csv };

/// JSON for ".json" paths, CSV otherwise.
inline Format format_for(const std::string& path) {
  return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0 ? Format::Json
                                                                            : Format::Csv;
}

inline void write_result(const TestResult& r, Format format, const std::string& path) {
  if (format == Format::Json) return write_json(to_json(r), path);
  auto out = detail::open_output(path);
  write_result_csv(r, out);
  detail::finish(out, path);
}

inline void write_result(const ExperimentReport& report, Format format, const std::string& path) {
  if (format == Format::Json) return write_json(to_json(report), path);
  auto out = detail::open_output(path);
  write_report_csv(report, out);
  detail::finish(out, path);
}

inline void write_result(const QuantileTable& table, Format format, const std::string& path) {
  if (format == Format::Json) return write_json(to_json(table), path);
  auto out = detail::open_output(path);
  write_quantiles_csv(table, out);
  detail::finish(out, path);
}

// ---- Plot data -----------------------------------------------------------

/// Two columns x = k/T, value = W(k) for k = 0..T.
inline void emit_plot_data(const PanelProcess& process, const std::string& path) {
  auto out = detail::open_output(path);
  out << "x,value\n";
  const std::size_t T = process.values.size() - 1;
  for (std::size_t k = 0; k <= T; ++k) {
    out << detail::format_double(static_cast<double>(k) / static_cast<double>(T)) << ','
        << detail::format_double(process.values[k]) << '\n';
  }
  detail::finish(out, path);
}

/// One row per Delta, one rate column per config (first-appearance order).
inline void emit_plot_data(const ExperimentReport& report, const std::string& path) {
  std::vector<std::string> configs;
  std::vector<double> deltas;
  for (const auto& e : report.entries) {
    if (std::find(configs.begin(), configs.end(), e.config) == configs.end()) configs.push_back(e.config);
    if (std::find(deltas.begin(), deltas.end(), e.delta) == deltas.end()) deltas.push_back(e.delta);
  }
  auto out = detail::open_output(path);
  out << "delta";
  for (const auto& c : configs) out << ',' << c;
  out << '\n';
  for (double d : deltas) {
    out << detail::format_double(d);
    for (const auto& c : configs) {
      out << ',';
      for (const auto& e : report.entries) {
        if (e.config == c && e.delta == d) {
          out << detail::format_double(e.rate);
          break;
        }
      }
    }
    out << '\n';
  }
  detail::finish(out, path);
}

}  // namespace panel_cpd::io
