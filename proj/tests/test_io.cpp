#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "panel_cpd/io.hpp"
#include "panel_cpd/montecarlo.hpp"

using namespace panel_cpd;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("panel_cpd_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const auto path = (dir_ / name).string();
    std::ofstream(path) << text;
    return path;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::vector<std::string> lines(const std::string& file) {
    std::ifstream in(file);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
  }

  fs::path dir_;
};

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_F(IoTest, WidePanel) {
  const Panel p = io::read_panel(write("p.csv", "1,2,3\n4,5,6\n"));
  EXPECT_EQ(p.individuals(), 2u);
  EXPECT_EQ(p.periods(), 3u);
  EXPECT_EQ(p(1, 2), 6.0);
}

TEST_F(IoTest, WideWithHeaderIdsAndDelimiter) {
  io::PanelFileSpec spec;
  spec.header = true;
  spec.id_column = true;
  spec.delimiter = ';';
  const Panel p = io::read_panel(write("p.csv", "id;t1;t2\na; 1.5;-2e-1\nb;3;+4\n\n"), spec);
  EXPECT_EQ(p, Panel::from_rows({{1.5, -0.2}, {3, 4}}));
}

TEST_F(IoTest, MalformedWideInput) {
  const auto ragged = write("r.csv", "1,2,3\n4,5\n");
  const std::string msg = error_of([&] { io::read_panel(ragged); });
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("r.csv"), std::string::npos) << msg;

  const auto text = write("t.csv", "1,2,3\n4,x,6\n");
  const std::string bad = error_of([&] { io::read_panel(text); });
  EXPECT_NE(bad.find("row 2, column 2"), std::string::npos) << bad;

  EXPECT_NE(error_of([&] { io::read_panel(write("m.csv", "1,,3\n4,5,6\n")); }).find("missing"),
            std::string::npos);
  EXPECT_NE(error_of([&] { io::read_panel(write("n.csv", "1,nan\n")); }), "");
  EXPECT_NE(error_of([&] { io::read_panel(write("e.csv", "")); }), "");
  EXPECT_NE(error_of([&] { io::read_panel(write("one.csv", "1\n2\n")); }), "");
  EXPECT_THROW(io::read_panel(path("absent.csv")), DataError);
}

TEST_F(IoTest, LongLayoutMatchesWide) {
  io::PanelFileSpec spec;
  spec.layout = io::PanelFileSpec::Layout::Long;
  spec.header = true;
  const Panel p = io::read_panel(
      write("l.csv", "id,t,value\nb,2,5\na,1,1\na,3,3\nb,1,4\na,2,2\nb,3,6\n"), spec);
  // ids in first-appearance order: b, a
  EXPECT_EQ(p, Panel::from_rows({{4, 5, 6}, {1, 2, 3}}));

  const Panel q = io::read_panel(write("l2.csv", "id,t,value\na,1,1\na,2,2\na,3,3\nb,1,4\nb,2,5\nb,3,6\n"), spec);
  EXPECT_EQ(q, io::read_panel(write("w.csv", "1,2,3\n4,5,6\n")));
}

TEST_F(IoTest, MalformedLongInput) {
  io::PanelFileSpec spec;
  spec.layout = io::PanelFileSpec::Layout::Long;
  EXPECT_NE(error_of([&] { io::read_panel(write("a.csv", "a,1,1\na,2,2\nb,1,3\n"), spec); }).find("incomplete"),
            std::string::npos);
  EXPECT_NE(error_of([&] { io::read_panel(write("b.csv", "a,1,1\na,1,2\n"), spec); }).find("duplicate"),
            std::string::npos);
  EXPECT_NE(error_of([&] { io::read_panel(write("c.csv", "a,1\n"), spec); }).find("3 fields"),
            std::string::npos);
}

TEST_F(IoTest, WidePanelRoundTrip) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Panel p = generate_panel({3 + seed, 5 + 2 * seed, 0.4, Innovation::student_t(2), 10, seed}, std::nullopt);
    const auto file = path("rt.csv");
    io::write_panel(p, file);
    EXPECT_EQ(io::read_panel(file), p);
  }
}

TEST_F(IoTest, TestResultJsonRoundTrip) {
  const Panel p = generate_panel({6, 50, 0.0, Innovation::normal(), 10, 1}, std::nullopt);
  std::vector<double> data = p.values();
  std::fill(data.begin(), data.begin() + 50, 1.0);
  TestResult r = run_test(Panel(6, 50, data), TestConfig::robust());
  ASSERT_TRUE(r.per_individual[0].skipped);
  const auto file = path("r.json");
  io::write_result(r, io::Format::Json, file);
  const TestResult back = io::test_result_from_json(io::read_json(file));
  EXPECT_EQ(back.statistic_value, r.statistic_value);
  EXPECT_EQ(back.critical_value, r.critical_value);
  EXPECT_EQ(back.p_value, r.p_value);
  EXPECT_EQ(back.reject, r.reject);
  EXPECT_EQ(back.argmax_split, r.argmax_split);
  EXPECT_EQ(back.effective_individuals, 5u);
  EXPECT_EQ(back.bandwidth, r.bandwidth);
  EXPECT_EQ(back.per_individual, r.per_individual);

  TestConfig integral = TestConfig::robust();
  integral.statistic = StatisticKind::Integral;
  r = run_test(Panel(6, 50, data), integral);
  io::write_result(r, io::Format::Json, file);
  const TestResult back2 = io::test_result_from_json(io::read_json(file));
  EXPECT_TRUE(std::isnan(back2.critical_value));
  EXPECT_FALSE(back2.p_value.has_value());
  EXPECT_EQ(back2.statistic, StatisticKind::Integral);
}

TEST_F(IoTest, ExperimentReportFormats) {
  ExperimentReport rep;
  rep.kind = "power";
  rep.replications = 10;
  rep.seed = 99;
  rep.entries.push_back({"robust", 200, 400, 0.25, "t:1", 0.1, 0.3, 3, 10, 99});
  rep.entries.push_back({"non-robust", 200, 400, 0.25, "t:1", 0.1, 0.1, 1, 10, 99});
  io::write_result(rep, io::Format::Csv, path("r.csv"));
  const auto csv = lines(path("r.csv"));
  ASSERT_EQ(csv.size(), 3u);
  EXPECT_EQ(csv[0], "config,N,T,delta,rate,reps,seed");
  EXPECT_EQ(csv[1], "robust,200,400,0.10000000000000001,0.29999999999999999,10,99");

  io::write_result(rep, io::Format::Json, path("r.json"));
  const auto back = io::experiment_report_from_json(io::read_json(path("r.json")));
  EXPECT_EQ(back.entries, rep.entries);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.kind, "power");
}

TEST_F(IoTest, UnwritablePath) {
  const TestResult r;
  EXPECT_THROW(io::write_result(r, io::Format::Json, path("no/such/dir/r.json")), DataError);
  EXPECT_THROW(io::emit_plot_data(PanelProcess{{0, 0, 0}, 1, 2}, path("no/such/dir/p.csv")), DataError);
}

TEST_F(IoTest, PlotData) {
  PanelProcess w{{0, 0.5, -0.25, 0.75, 0}, 3, 4};
  io::emit_plot_data(w, path("w.csv"));
  const auto rows = lines(path("w.csv"));
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], "x,value");
  EXPECT_EQ(rows[3], "0.5,-0.25");

  ExperimentReport rep;
  const auto deltas = parse_grid("0:0.2:0.025");
  for (double d : deltas) {
    rep.entries.push_back({"non-robust", 200, 400, 0.25, "normal", d, d, 0, 10, 1});
    rep.entries.push_back({"robust", 200, 400, 0.25, "normal", d, 2 * d, 0, 10, 1});
  }
  io::emit_plot_data(rep, path("p.csv"));
  const auto curve = lines(path("p.csv"));
  ASSERT_EQ(curve.size(), 10u);
  EXPECT_EQ(curve[0], "delta,non-robust,robust");
  for (std::size_t j = 1; j < curve.size(); ++j) {
    EXPECT_EQ(std::count(curve[j].begin(), curve[j].end(), ','), 2);
  }

  io::emit_plot_data(ExperimentReport{}, path("empty.csv"));
  EXPECT_EQ(lines(path("empty.csv")), std::vector<std::string>{"delta"});
}

TEST_F(IoTest, QuantileTableJson) {
  const QuantileTable t = estimate_quantiles(1000, {0.9, 0.95}, {101, 5});
  io::write_result(t, io::Format::Json, path("q.json"));
  EXPECT_EQ(io::quantile_table_from_json(io::read_json(path("q.json"))), t);
  io::write_result(t, io::Format::Csv, path("q.csv"));
  EXPECT_EQ(lines(path("q.csv")).front(), "level,q");
  EXPECT_THROW(io::quantile_table_from_json(nlohmann::json::parse(R"({"version": 2})")), DataError);
  EXPECT_THROW(io::read_json(write("bad.json", "{not json")), DataError);
}

TEST(ShippedData, QuantileTableMatchesBuiltin) {
  const auto t = io::quantile_table_from_json(io::read_json(PANEL_CPD_DATA_DIR "/gamma_sup_quantiles.v1.json"));
  EXPECT_EQ(t.entries, QuantileTable::builtin().entries);
}

TEST(Format, ByExtension) {
  EXPECT_EQ(io::format_for("a.json"), io::Format::Json);
  EXPECT_EQ(io::format_for("a.csv"), io::Format::Csv);
  EXPECT_EQ(io::format_for("json"), io::Format::Csv);
}
