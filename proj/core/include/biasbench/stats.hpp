#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "biasbench/bias.hpp"
#include "biasbench/scoring.hpp"

namespace biasbench {

/// Observations by columns. Column 0 must be the all-ones intercept.
struct DesignMatrix {
  Eigen::MatrixXd X;
  std::vector<std::string> columns;
};

struct RegressionResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd std_error;
  std::vector<std::string> columns;
  /// Overall F for ols_fit; the partial F of the tested columns otherwise.
  double F = 0.0;
  double p = 1.0;
  double R2 = 0.0;
  std::size_t n = 0;
  /// Numerator degrees of freedom of F.
  std::size_t df_model = 0;
  std::size_t df_resid = 0;
  double rss = 0.0;
  double tss = 0.0;
  /// Column whose coefficient a partial test reports as beta.
  std::optional<std::size_t> tested;

  double tested_beta() const { return tested ? beta[static_cast<Eigen::Index>(*tested)] : 0.0; }
  double tested_se() const { return tested ? std_error[static_cast<Eigen::Index>(*tested)] : 0.0; }
};

/// Upper tail P(F(df1, df2) > f) through the regularized incomplete beta
/// function. Throws ValidationError for f < 0 or degrees of freedom below 1.
double f_tail(double f, double df1, double df2);

/// Least squares via column-pivoted Householder QR. R^2 uses the centered
/// total sum of squares; a constant response gives R^2 = 0 and F = 0.
/// Throws ValidationError when X is rank deficient or n <= columns.
RegressionResult ols_fit(const DesignMatrix& design, const Eigen::VectorXd& y);

/// Full-model fit plus the partial F-test that the coefficients of
/// `tested_columns` are all zero.
RegressionResult partial_f_test(const DesignMatrix& design, const Eigen::VectorXd& y,
                                const std::vector<std::size_t>& tested_columns);

/// Resistance of one (model, bias, level, temperature) cell.
struct CellScore {
  std::string model_id;
  BiasCategory bias = BiasCategory::Anchoring;
  int level = 1;
  double temperature = 0.0;
  double score = 0.0;
};

/// One cell per non-empty (model, bias, level, temperature) group.
std::vector<CellScore> cell_scores(const std::vector<Classification>& classifications);

/// Fits score ~ 1 + temperature + model dummies (first model by id is the
/// reference) over the cells of `bias` and tests the temperature
/// coefficient. Throws ValidationError when no model has two temperatures.
RegressionResult anova_temperature(const std::vector<CellScore>& cells, BiasCategory bias);

/// Per-model metadata for the size and reasoning regressions.
struct ModelTraits {
  std::optional<double> params_billions;
  std::optional<bool> reasoning;
};

/// score ~ 1 + log10(parameter count) over cells (optionally one bias).
RegressionResult regress_size(const std::vector<CellScore>& cells, const std::map<std::string, ModelTraits>& traits,
                              std::optional<BiasCategory> bias = std::nullopt);

/// score ~ 1 + reasoning flag over cells (optionally one bias).
RegressionResult regress_reasoning(const std::vector<CellScore>& cells,
                                   const std::map<std::string, ModelTraits>& traits,
                                   std::optional<BiasCategory> bias = std::nullopt);

}  // namespace biasbench
