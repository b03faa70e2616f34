#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "panel_cpd/cusum.hpp"
#include "panel_cpd/rng.hpp"

using namespace panel_cpd;

namespace {

std::vector<double> gaussian(std::size_t n, rng::Xoshiro256& gen) {
  rng::NormalSampler normal;
  std::vector<double> v(n);
  for (auto& x : v) x = normal(gen);
  return v;
}

}  // namespace

TEST(IndividualCusum, Examples) {
  const auto flat = individual_cusum(std::vector<double>(6, 3.0), 1.0);
  for (double s : flat.values) EXPECT_NEAR(s, 0.0, 1e-15);

  const auto step = individual_cusum(std::vector<double>{0, 0, 1, 1}, 1.0);
  ASSERT_EQ(step.values.size(), 5u);
  EXPECT_DOUBLE_EQ(step.values[2], -0.5);
  EXPECT_EQ(step.v_used, 1.0);

  EXPECT_THROW(individual_cusum(std::vector<double>{1, 2}, 0.0), UsageError);
  EXPECT_THROW(individual_cusum(std::vector<double>{1}, 1.0), DataError);
}

TEST(IndividualCusum, BoundaryZerosAndOracle) {
  rng::Xoshiro256 gen(1);
  for (std::size_t T = 2; T < 40; ++T) {
    const auto y = gaussian(T, gen);
    const double v = 0.5 + static_cast<double>(T % 3);
    const auto s = individual_cusum(y, v);
    EXPECT_EQ(s.values.front(), 0.0);
    EXPECT_EQ(s.values.back(), 0.0);
    for (std::size_t k = 0; k <= T; ++k) EXPECT_NEAR(s.values[k], oracle::cusum_at(y, v, k), 1e-12);
  }
}

TEST(IndividualCusum, TimeReversal) {
  rng::Xoshiro256 gen(2);
  const auto y = gaussian(31, gen);
  std::vector<double> rev(y.rbegin(), y.rend());
  const auto s = individual_cusum(y, 1.3).values;
  const auto r = individual_cusum(rev, 1.3).values;
  const std::size_t T = y.size();
  for (std::size_t k = 0; k <= T; ++k) EXPECT_NEAR(r[k], -s[T - k], 1e-12);
}

TEST(IndividualCusum, ShiftInvariant) {
  rng::Xoshiro256 gen(3);
  const auto y = gaussian(50, gen);
  auto shifted = y;
  for (auto& v : shifted) v += 123.0;
  const auto a = individual_cusum(y, 1.0).values;
  const auto b = individual_cusum(shifted, 1.0).values;
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-11);
}

TEST(PanelProcess, CenteringOnly) {
  const auto w = panel_process({std::vector<double>(5, 0.0)});
  EXPECT_DOUBLE_EQ(w.values[2], -0.25);
  EXPECT_EQ(w.values[0], 0.0);
  EXPECT_EQ(w.values[4], 0.0);
  const auto sup = sup_statistic(w);
  EXPECT_DOUBLE_EQ(sup.value, 0.25);
  EXPECT_EQ(sup.argmax, 2u);
}

TEST(PanelProcess, SingleAndReplicatedIndividuals) {
  rng::Xoshiro256 gen(4);
  const auto y = gaussian(12, gen);
  const auto s = individual_cusum(y, 1.0).values;
  const auto w1 = panel_process({s});
  const auto w4 = panel_process({s, s, s, s});
  for (std::size_t k = 1; k < 12; ++k) {
    const double single = s[k] * s[k] - bridge_variance(k, 12);
    EXPECT_NEAR(w1.values[k], single, 1e-15);
    EXPECT_NEAR(w4.values[k], 2.0 * single, 1e-14);
  }
  EXPECT_THROW(panel_process({s, std::vector<double>(5, 0.0)}), DataError);
  EXPECT_THROW(panel_process({}), DataError);
}

TEST(PanelStatistic, MatchesBruteForceOracle) {
  rng::Xoshiro256 gen(5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::vector<double>> rows;
    std::vector<LocationScaleEstimate> ls;
    std::vector<LrvEstimate> lrv;
    std::vector<double> v;
    std::vector<std::vector<double>> ys;
    for (int i = 0; i < 3; ++i) {
      rows.push_back(gaussian(8, gen));
      const double mu = 0.1 * i;
      const double sigma = 0.5 + 0.25 * i;
      ls.push_back(fixed_location_scale(mu, sigma));
      const double v2 = 0.5 + i;
      lrv.push_back({v2, false, 2});
      v.push_back(std::sqrt(v2));
      std::vector<double> y;
      for (double x : rows.back()) y.push_back(std::clamp((x - mu) / sigma, -1.0, 1.0));
      ys.push_back(y);
    }
    const Panel panel = Panel::from_rows(rows);
    const PsiSpec psi = PsiSpec::huber(1.0);
    const auto w = panel_statistic(panel, std::span(&psi, 1), ls, lrv);
    const auto ref = oracle::panel_w(ys, v);
    for (std::size_t k = 0; k <= 8; ++k) EXPECT_NEAR(w.values[k], ref[k], 1e-12);
    EXPECT_NEAR(sup_statistic(w).value, oracle::sup_abs(ref), 1e-12);
    EXPECT_NEAR(integral_statistic(w), oracle::integral_abs(ref), 1e-12);
  }
}

TEST(PanelStatistic, ThreadCountDoesNotChangeBits) {
  rng::Xoshiro256 gen(6);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 37; ++i) rows.push_back(gaussian(60, gen));
  const Panel panel = Panel::from_rows(rows);
  std::vector<LocationScaleEstimate> ls(37, fixed_location_scale(0, 1));
  std::vector<LrvEstimate> lrv(37, LrvEstimate{1.0, false, 1});
  const PsiSpec psi = PsiSpec::smooth_huber();
  const auto a = panel_statistic(panel, std::span(&psi, 1), ls, lrv, 1);
  const auto b = panel_statistic(panel, std::span(&psi, 1), ls, lrv, 8);
  EXPECT_EQ(a.values, b.values);
}

TEST(SupStatistic, TieBreakAndSpike) {
  PanelProcess zero{std::vector<double>(9, 0.0), 1, 8};
  EXPECT_EQ(sup_statistic(zero).value, 0.0);
  EXPECT_EQ(sup_statistic(zero).argmax, 1u);

  PanelProcess spike{std::vector<double>(9, 0.1), 1, 8};
  spike.values.front() = spike.values.back() = 0.0;
  spike.values[6] = -3.0;
  EXPECT_EQ(sup_statistic(spike).value, 3.0);
  EXPECT_EQ(sup_statistic(spike).argmax, 6u);

  PanelProcess tie{{0, 1, -2, 2, 0}, 1, 4};
  EXPECT_EQ(sup_statistic(tie).argmax, 2u);
}

TEST(IntegralStatistic, Rectangles) {
  PanelProcess zero{std::vector<double>(11, 0.0), 1, 10};
  EXPECT_EQ(integral_statistic(zero), 0.0);
  PanelProcess constant{std::vector<double>(11, -0.7), 1, 10};
  constant.values.front() = constant.values.back() = 0.0;
  EXPECT_NEAR(integral_statistic(constant), 0.7 * 9.0 / 10.0, 1e-15);
}

TEST(PanelProcess, NullMeanNearZero) {
  // i.i.d. N(0,1) rows, identity psi, known v = 1: E W(1/2) -> 0.
  rng::Xoshiro256 gen(77);
  rng::NormalSampler normal;
  const std::size_t N = 100, T = 400;
  double mean = 0.0;
  const int reps = 1000;
  std::vector<double> y(T), s(T + 1);
  for (int r = 0; r < reps; ++r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      for (auto& v : y) v = normal(gen);
      individual_cusum(y, 1.0, s);
      acc += s[T / 2] * s[T / 2] - bridge_variance(T / 2, T);
    }
    mean += acc / std::sqrt(static_cast<double>(N));
  }
  mean /= reps;
  EXPECT_NEAR(mean, 0.0, 0.1);
}
