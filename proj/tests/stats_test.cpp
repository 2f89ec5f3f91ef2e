#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "biasbench/error.hpp"
#include "biasbench/stats.hpp"
#include "oracles.hpp"

namespace bb = biasbench;

namespace {

bb::DesignMatrix design(const std::vector<std::vector<double>>& rows) {
  bb::DesignMatrix d;
  d.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  for (std::size_t j = 0; j < rows[0].size(); ++j) d.columns.push_back(j == 0 ? "intercept" : "x" + std::to_string(j));
  return d;
}

Eigen::VectorXd vec(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

// Two models at three temperatures and five levels, with a known slope.
std::vector<bb::CellScore> temperature_cells(double slope, double noise, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> eps(0.0, noise);
  std::vector<bb::CellScore> cells;
  for (const std::string m : {"alpha", "beta"}) {
    for (double t : {0.2, 0.7, 1.2}) {
      for (int level = 1; level <= 5; ++level) {
        const double base = m == "alpha" ? 0.6 : 0.4;
        cells.push_back({m, bb::BiasCategory::Confirmation, level, t, base + slope * t + eps(gen)});
      }
    }
  }
  return cells;
}

}  // namespace

TEST(Ols, PerfectLine) {
  const auto r = bb::ols_fit(design({{1, 0}, {1, 1}, {1, 2}}), vec({0, 1, 2}));
  EXPECT_NEAR(r.beta[1], 1.0, 1e-12);
  EXPECT_NEAR(r.beta[0], 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.R2, 1.0);
  EXPECT_TRUE(std::isinf(r.F));
  EXPECT_EQ(r.p, 0.0);
}

TEST(Ols, ConstantResponse) {
  const auto r = bb::ols_fit(design({{1, 0}, {1, 1}, {1, 2}, {1, 5}}), vec({3, 3, 3, 3}));
  EXPECT_NEAR(r.beta[1], 0.0, 1e-12);
  EXPECT_EQ(r.R2, 0.0);
  EXPECT_EQ(r.F, 0.0);
  EXPECT_EQ(r.p, 1.0);
}

TEST(Ols, SyntheticSetMatchesNormalEquations) {
  std::mt19937_64 gen(50);
  std::normal_distribution<double> x(0.0, 2.0);
  std::normal_distribution<double> e(0.0, 0.5);
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 50; ++i) {
    const double a = x(gen);
    const double b = x(gen);
    rows.push_back({1, a, b});
    y.push_back(1.5 + 0.8 * a - 0.3 * b + e(gen));
  }
  const auto r = bb::ols_fit(design(rows), vec(y));
  const auto ref = oracle::ols(rows, y);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(r.beta[j], ref.beta[static_cast<std::size_t>(j)], 1e-8);
  EXPECT_NEAR(r.R2, ref.r2, 1e-8);
  EXPECT_NEAR(r.F, ref.f, 1e-8 * ref.f);
  EXPECT_NEAR(r.p, oracle::f_tail(ref.f, 2, 47), 1e-8);
  EXPECT_EQ(r.df_model, 2u);
  EXPECT_EQ(r.df_resid, 47u);
  // Truth within the standard errors.
  EXPECT_LT(std::abs(r.beta[1] - 0.8), 3 * r.std_error[1]);
  EXPECT_LT(std::abs(r.beta[2] + 0.3), 3 * r.std_error[2]);
}

TEST(Ols, StandardErrorsMatchClassicalFormula) {
  // Single covariate: se(b1) = sqrt(sigma^2 / Sxx).
  const std::vector<double> xs = {1, 2, 4, 5, 7, 8, 10};
  const std::vector<double> ys = {2.1, 2.9, 5.2, 5.8, 8.1, 8.7, 11.5};
  std::vector<std::vector<double>> rows;
  for (double v : xs) rows.push_back({1, v});
  const auto r = bb::ols_fit(design(rows), vec(ys));
  double mx = 0;
  for (double v : xs) mx += v;
  mx /= xs.size();
  double sxx = 0;
  for (double v : xs) sxx += (v - mx) * (v - mx);
  const double sigma2 = r.rss / (xs.size() - 2);
  EXPECT_NEAR(r.std_error[1], std::sqrt(sigma2 / sxx), 1e-12);
}

TEST(Ols, RSquaredIsSquaredCorrelation) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> n01;
  std::vector<std::vector<double>> rows;
  std::vector<double> xs, ys;
  for (int i = 0; i < 40; ++i) {
    const double a = n01(gen);
    xs.push_back(a);
    ys.push_back(0.4 * a + n01(gen));
    rows.push_back({1, a});
  }
  const auto r = bb::ols_fit(design(rows), vec(ys));
  double mx = 0, my = 0;
  for (int i = 0; i < 40; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= 40;
  my /= 40;
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 40; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  EXPECT_NEAR(r.R2, sxy * sxy / (sxx * syy), 1e-12);
}

TEST(Ols, Errors) {
  EXPECT_THROW(bb::ols_fit(design({{1, 1}, {1, 2}}), vec({1, 2})), bb::ValidationError);
  EXPECT_THROW(bb::ols_fit(design({{1, 1, 2}, {1, 2, 4}, {1, 3, 6}, {1, 4, 8}}), vec({1, 2, 3, 5})),
               bb::ValidationError);
  EXPECT_THROW(bb::ols_fit(design({{2, 1}, {1, 2}, {1, 3}}), vec({1, 2, 3})), bb::ValidationError);
}

TEST(Ols, RowPermutationInvariance) {
  std::mt19937_64 gen(12);
  std::normal_distribution<double> n01;
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 30; ++i) {
    rows.push_back({1, n01(gen), n01(gen)});
    y.push_back(n01(gen));
  }
  const auto a = bb::ols_fit(design(rows), vec(y));
  std::vector<std::size_t> idx(30);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), gen);
  std::vector<std::vector<double>> rows2;
  std::vector<double> y2;
  for (auto i : idx) {
    rows2.push_back(rows[i]);
    y2.push_back(y[i]);
  }
  const auto b = bb::ols_fit(design(rows2), vec(y2));
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(a.beta[j], b.beta[j], 1e-12);
  EXPECT_NEAR(a.F, b.F, 1e-9);
}

TEST(Ols, OrthogonalNuisanceColumnLeavesSlope) {
  // x and z are centered and orthogonal by construction.
  const std::vector<double> x = {-3, -1, 1, 3, -3, -1, 1, 3};
  const std::vector<double> z = {1, -1, -1, 1, 1, -1, -1, 1};
  const std::vector<double> y = {0.2, 0.5, 0.9, 1.4, 0.1, 0.6, 1.0, 1.2};
  std::vector<std::vector<double>> without, with;
  for (std::size_t i = 0; i < x.size(); ++i) {
    without.push_back({1, x[i]});
    with.push_back({1, x[i], z[i]});
  }
  EXPECT_NEAR(bb::ols_fit(design(without), vec(y)).beta[1], bb::ols_fit(design(with), vec(y)).beta[1], 1e-10);
}

TEST(FTail, MatchesQuadratureOnGrid) {
  for (double f : {0.05, 0.5, 1.0, 2.0, 4.0, 10.861, 40.0}) {
    for (double d1 : {1.0, 2.0, 3.0, 7.0, 12.0}) {
      for (double d2 : {1.0, 2.0, 5.0, 20.0, 60.0, 200.0}) {
        ASSERT_NEAR(bb::f_tail(f, d1, d2), oracle::f_tail(f, d1, d2), 1e-8) << f << " " << d1 << " " << d2;
      }
    }
  }
}

TEST(FTail, LimitsAndMonotone) {
  EXPECT_EQ(bb::f_tail(0.0, 3, 10), 1.0);
  EXPECT_EQ(bb::f_tail(std::numeric_limits<double>::infinity(), 3, 10), 0.0);
  EXPECT_LT(bb::f_tail(1e6, 3, 10), 1e-10);
  double prev = 1.0;
  for (double f = 0.01; f < 50; f *= 1.3) {
    const double p = bb::f_tail(f, 2, 15);
    EXPECT_LE(p, prev);
    prev = p;
  }
  EXPECT_THROW(bb::f_tail(-1, 1, 1), bb::ValidationError);
  EXPECT_THROW(bb::f_tail(1, 0.5, 1), bb::ValidationError);
}

TEST(FTail, TemperatureTableIsConsistent) {
  // (F, p) pairs of the per-bias temperature table. The dfs are not given;
  // one tested coefficient and a large residual df reproduce every p once
  // the three-decimal rounding of F is allowed for.
  const std::vector<std::pair<double, double>> rows = {{0.001, 0.982}, {0.292, 0.589}, {10.861, 0.001},
                                                       {0.066, 0.798}, {0.070, 0.791}, {2.698, 0.101},
                                                       {0.071, 0.790}, {0.221, 0.638}};
  const double d2 = 2000;
  for (const auto& [f, p] : rows) {
    const double hi = bb::f_tail(std::max(0.0, f - 0.0005), 1, d2);
    const double lo = bb::f_tail(f + 0.0005, 1, d2);
    EXPECT_GE(p + 0.0005, lo) << f;
    EXPECT_LE(p - 0.0005, hi) << f;
  }
  EXPECT_NEAR(bb::f_tail(10.861, 1, d2), 0.001, 0.0005);
}

TEST(PartialF, EqualsSquaredT) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n01;
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 25; ++i) {
    const double a = n01(gen), b = n01(gen);
    rows.push_back({1, a, b});
    y.push_back(0.3 * a + n01(gen));
  }
  const auto r = bb::partial_f_test(design(rows), vec(y), {1});
  const double t = r.beta[1] / r.std_error[1];
  EXPECT_NEAR(r.F, t * t, 1e-9 * r.F);
  EXPECT_EQ(r.df_model, 1u);
  EXPECT_EQ(*r.tested, 1u);
  EXPECT_THROW(bb::partial_f_test(design(rows), vec(y), {0}), bb::ValidationError);
}

TEST(AnovaTemperature, RecoversInjectedSlope) {
  const auto cells = temperature_cells(0.1, 0.01, 1);
  const auto r = bb::anova_temperature(cells, bb::BiasCategory::Confirmation);
  EXPECT_NEAR(r.tested_beta(), 0.1, 2 * r.tested_se());
  EXPECT_LT(r.p, 0.01);
  EXPECT_EQ(r.n, 30u);
  EXPECT_EQ(r.df_resid, 27u);
}

TEST(AnovaTemperature, ShuffledTemperatureIsNotSignificant) {
  std::mt19937_64 gen(17);
  int quiet = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto cells = temperature_cells(0.1, 0.05, 1000 + static_cast<std::uint64_t>(trial));
    std::vector<double> temps;
    for (const auto& c : cells) temps.push_back(c.temperature);
    std::shuffle(temps.begin(), temps.end(), gen);
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i].temperature = temps[i];
    // Shuffling breaks the slope; the model intercepts still differ.
    for (auto& c : cells) c.score -= 0.1 * 0.7;
    quiet += bb::anova_temperature(cells, bb::BiasCategory::Confirmation).p > 0.01;
  }
  EXPECT_GE(quiet, 95);
}

TEST(AnovaTemperature, NeedsVariation) {
  auto cells = temperature_cells(0.0, 0.01, 2);
  for (auto& c : cells) c.temperature = 0.2;
  try {
    bb::anova_temperature(cells, bb::BiasCategory::Confirmation);
    FAIL();
  } catch (const bb::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient variation"), std::string::npos);
  }
  EXPECT_THROW(bb::anova_temperature(cells, bb::BiasCategory::Framing), bb::ValidationError);
}

TEST(TraitRegressions, SizeAndReasoning) {
  std::vector<bb::CellScore> cells;
  const std::map<std::string, bb::ModelTraits> traits = {
      {"s", {0.5, false}}, {"m", {7.0, false}}, {"l", {70.0, true}}, {"x", {std::nullopt, std::nullopt}}};
  for (const auto& [id, t] : traits) {
    for (int level = 1; level <= 5; ++level) {
      const double size = t.params_billions ? std::log10(*t.params_billions * 1e9) : 0.0;
      cells.push_back({id, bb::BiasCategory::Framing, level, 0.2, 0.1 * size - 0.5 + 0.001 * level});
    }
  }
  const auto size = bb::regress_size(cells, traits);
  EXPECT_EQ(size.n, 15u);
  EXPECT_NEAR(size.tested_beta(), 0.1, 1e-3);
  EXPECT_GT(size.R2, 0.99);
  const auto reasoning = bb::regress_reasoning(cells, traits, bb::BiasCategory::Framing);
  EXPECT_EQ(reasoning.n, 15u);
  EXPECT_GT(reasoning.tested_beta(), 0.0);

  const std::map<std::string, bb::ModelTraits> same = {{"s", {1.0, true}}, {"m", {1.0, true}}};
  EXPECT_THROW(bb::regress_size(cells, same), bb::ValidationError);
  EXPECT_THROW(bb::regress_reasoning(cells, same), bb::ValidationError);
}

TEST(CellScores, OnePerGroup) {
  std::vector<bb::Classification> cs;
  for (int i = 0; i < 10; ++i) {
    bb::Classification c;
    c.prompt_ref = {"t", static_cast<std::size_t>(i), 1 + i % 2};
    c.model_id = "m";
    c.bias = bb::BiasCategory::Framing;
    c.temperature = 0.2;
    c.outcome = i < 4 ? bb::Outcome::Biased : bb::Outcome::Unbiased;
    cs.push_back(c);
  }
  const auto cells = bb::cell_scores(cs);
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_DOUBLE_EQ(cells[0].score, 1.0 - 2.0 / 5.0);
  EXPECT_DOUBLE_EQ(cells[1].score, 1.0 - 2.0 / 5.0);
}
