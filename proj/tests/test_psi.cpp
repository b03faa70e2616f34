#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "panel_cpd/psi.hpp"
#include "panel_cpd/rng.hpp"

using namespace panel_cpd;

TEST(EvalPsi, PointValues) {
  EXPECT_DOUBLE_EQ(eval_psi(PsiSpec::huber(1.345), 0.5), 0.5);
  EXPECT_DOUBLE_EQ(eval_psi(PsiSpec::huber(1.345), 10.0), 1.345);
  EXPECT_DOUBLE_EQ(eval_psi(PsiSpec::huber(1.345), -10.0), -1.345);
  EXPECT_DOUBLE_EQ(eval_psi(PsiSpec::bisquare(4.685), 4.685), 0.0);
  EXPECT_DOUBLE_EQ(eval_psi(PsiSpec::bisquare(4.685), 7.0), 0.0);
  EXPECT_DOUBLE_EQ(eval_psi(PsiSpec::identity(), -3.7), -3.7);
}

TEST(EvalPsi, SmoothHuberRegions) {
  const PsiSpec spec = PsiSpec::smooth_huber(1.0, 0.4);
  EXPECT_DOUBLE_EQ(eval_psi(spec, 0.6), 0.6);
  EXPECT_DOUBLE_EQ(eval_psi(spec, -0.3), -0.3);
  EXPECT_DOUBLE_EQ(eval_psi(spec, 1.4), 1.0);
  EXPECT_DOUBLE_EQ(eval_psi(spec, -5.0), -1.0);
  const double mid = eval_psi(spec, 1.0);
  EXPECT_GT(mid, 0.6);
  EXPECT_LT(mid, 1.0);
  EXPECT_EQ(PsiSpec::smooth_huber(1.345).delta, 0.5 * 1.345);
}

TEST(EvalPsi, BisquareBound) {
  const PsiSpec spec = PsiSpec::bisquare(4.685);
  double best = 0.0;
  for (int j = 0; j <= 100000; ++j) best = std::max(best, std::abs(eval_psi(spec, 5.0 * j / 100000.0)));
  EXPECT_NEAR(best, psi_bound(spec), 1e-6);
  EXPECT_LE(psi_bound(spec), 0.3849 * spec.k);
}

TEST(PsiProperties, BoundedOddMonotoneLipschitz) {
  rng::Xoshiro256 gen(7);
  rng::NormalSampler normal;
  for (const PsiSpec& spec : {PsiSpec::huber(1.345), PsiSpec::smooth_huber(1.345),
                              PsiSpec::smooth_huber(2.0, 0.3), PsiSpec::huber(0.5)}) {
    double prev = eval_psi(spec, -20.0);
    for (int j = -20000; j <= 20000; ++j) {
      const double x = j * 1e-3;
      const double y = eval_psi(spec, x);
      EXPECT_LE(std::abs(y), spec.k);
      EXPECT_EQ(eval_psi(spec, -x), -y);
      EXPECT_GE(y, prev) << "not monotone at " << x;
      prev = y;
    }
    for (int r = 0; r < 20000; ++r) {
      const double x = 3.0 * normal(gen);
      const double y = 3.0 * normal(gen);
      EXPECT_LE(std::abs(eval_psi(spec, x) - eval_psi(spec, y)), std::abs(x - y) * (1 + 1e-12));
    }
  }
}

TEST(PsiProperties, SmoothHuberIsC2AtBandEdges) {
  const PsiSpec spec = PsiSpec::smooth_huber(1.345);
  auto d1 = [&](double x, double h) { return (eval_psi(spec, x + h) - eval_psi(spec, x - h)) / (2 * h); };
  // One-sided second differences on either side of each band edge.
  auto d2_left = [&](double x, double h) {
    return (eval_psi(spec, x) - 2 * eval_psi(spec, x - h) + eval_psi(spec, x - 2 * h)) / (h * h);
  };
  auto d2_right = [&](double x, double h) {
    return (eval_psi(spec, x + 2 * h) - 2 * eval_psi(spec, x + h) + eval_psi(spec, x)) / (h * h);
  };
  for (double edge : {spec.k - spec.delta, spec.k + spec.delta}) {
    double prev_gap = HUGE_VAL;
    for (double h : {1e-2, 1e-3, 1e-4}) {
      const double gap = std::abs(d2_left(edge, h) - d2_right(edge, h));
      EXPECT_LT(gap, prev_gap);
      prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 1e-2);
  }
  EXPECT_NEAR(d1(spec.k - spec.delta, 1e-6), 1.0, 1e-6);
  EXPECT_NEAR(d1(spec.k + spec.delta, 1e-6), 0.0, 1e-6);
  // The plain Huber has a curvature jump only in the sense of a kink: slope 1 -> 0.
  const PsiSpec huber = PsiSpec::huber(1.345);
  EXPECT_NEAR((eval_psi(huber, 1.345 + 1e-4) - eval_psi(huber, 1.345)) / 1e-4, 0.0, 1e-9);
}

TEST(TransformSeries, Examples) {
  const std::vector<double> x{1, 2, 3};
  EXPECT_EQ(transform_series(PsiSpec::identity(), {0, 1}, x), x);
  EXPECT_EQ(transform_series(PsiSpec::huber(1.345), {4, 1}, std::vector<double>{4, 4, 4}),
            (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(transform_series(PsiSpec::huber(1.0), {0, 0.1}, std::vector<double>{1, -1}),
            (std::vector<double>{1, -1}));
}

TEST(TransformSeries, RejectsNonpositiveSigma) {
  const std::vector<double> x{1, 2};
  EXPECT_THROW(transform_series(PsiSpec::huber(), {0, 0}, x), UsageError);
  EXPECT_THROW(transform_series(PsiSpec::huber(), {0, -1}, x), UsageError);
}

TEST(TransformSeries, CommutesWithRestandardization) {
  rng::Xoshiro256 gen(11);
  rng::NormalSampler normal;
  for (int rep = 0; rep < 200; ++rep) {
    const double mu = 5 * normal(gen);
    const double sigma = std::exp(normal(gen));
    std::vector<double> x(25), z(25);
    for (std::size_t t = 0; t < x.size(); ++t) {
      x[t] = mu + 3 * sigma * normal(gen);
      z[t] = (x[t] - mu) / sigma;
    }
    for (const PsiSpec& spec : {PsiSpec::identity(), PsiSpec::huber(), PsiSpec::smooth_huber(),
                                PsiSpec::bisquare()}) {
      EXPECT_EQ(transform_series(spec, {mu, sigma}, x), transform_series(spec, {0, 1}, z));
    }
  }
}

TEST(ParsePsi, RoundTripAndErrors) {
  EXPECT_EQ(parse_psi("identity"), PsiSpec::identity());
  EXPECT_EQ(parse_psi("huber:1.345"), PsiSpec::huber(1.345));
  EXPECT_EQ(parse_psi("huber"), PsiSpec::huber(1.345));
  EXPECT_EQ(parse_psi("smooth-huber:1.345:0.6725"), PsiSpec::smooth_huber(1.345, 0.6725));
  EXPECT_EQ(parse_psi("smooth-huber:2"), PsiSpec::smooth_huber(2.0, 1.0));
  EXPECT_EQ(parse_psi("bisquare:4.685"), PsiSpec::bisquare(4.685));
  for (const PsiSpec& s : {PsiSpec::huber(0.7), PsiSpec::smooth_huber(1.1, 0.2), PsiSpec::bisquare(3)}) {
    EXPECT_EQ(parse_psi(to_string(s)), s);
  }
  EXPECT_THROW(parse_psi("huber:-1"), UsageError);
  EXPECT_THROW(parse_psi("smooth-huber:1:1"), UsageError);
  EXPECT_THROW(parse_psi("smooth-huber:1:0"), UsageError);
  EXPECT_THROW(parse_psi("tukey"), UsageError);
  EXPECT_THROW(parse_psi("huber:abc"), UsageError);
}
