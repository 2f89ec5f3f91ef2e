#include "biasbench/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "biasbench/error.hpp"

namespace biasbench {

double f_tail(double f, double df1, double df2) {
  if (!(df1 >= 1.0) || !(df2 >= 1.0) || !std::isfinite(df1) || !std::isfinite(df2))
    throw ValidationError(fmt::format("invalid degrees of freedom ({}, {})", df1, df2));
  if (std::isnan(f) || f < 0.0) throw ValidationError(fmt::format("F statistic {} must be non-negative", f));
  if (f == 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  // P(F > f) = I_x(df2/2, df1/2) with x = df2 / (df2 + df1 f).
  const double x = df2 / (df2 + df1 * f);
  return boost::math::ibeta(df2 / 2.0, df1 / 2.0, x);
}

namespace {

struct Fit {
  Eigen::VectorXd beta;
  Eigen::VectorXd std_error;
  double rss = 0.0;
};

Fit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const auto n = X.rows();
  const auto p = X.cols();
  if (y.size() != n) throw ValidationError("response length does not match design rows");
  if (n <= p) throw ValidationError(fmt::format("need more observations ({}) than columns ({})", n, p));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p) throw ValidationError(fmt::format("design matrix is rank deficient (rank {} < {})", qr.rank(), p));

  Fit fit;
  fit.beta = qr.solve(y);
  const Eigen::VectorXd resid = y - X * fit.beta;
  fit.rss = resid.squaredNorm();

  // (X'X)^-1 = P R^-1 R^-T P'.
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd cov_perm = Rinv * Rinv.transpose();
  const Eigen::MatrixXd cov = qr.colsPermutation() * cov_perm * qr.colsPermutation().transpose();
  const double sigma2 = fit.rss / static_cast<double>(n - p);
  fit.std_error = (cov.diagonal() * sigma2).cwiseSqrt();
  return fit;
}

double f_stat(double explained, double df_num, double rss, double df_den) {
  if (explained <= 0.0) return 0.0;
  if (rss <= 0.0) return std::numeric_limits<double>::infinity();
  return (explained / df_num) / (rss / df_den);
}

}  // namespace

RegressionResult ols_fit(const DesignMatrix& design, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd& X = design.X;
  if (X.cols() < 1 || (X.col(0).array() != 1.0).any())
    throw ValidationError("design matrix column 0 must be the intercept");
  Fit fit = least_squares(X, y);

  RegressionResult r;
  r.beta = fit.beta;
  r.std_error = fit.std_error;
  r.columns = design.columns;
  r.n = static_cast<std::size_t>(X.rows());
  r.df_model = static_cast<std::size_t>(X.cols() - 1);
  r.df_resid = r.n - static_cast<std::size_t>(X.cols());
  r.rss = fit.rss;
  r.tss = (y.array() - y.mean()).square().sum();
  // Scale-aware guard so a constant response does not report noise as fit.
  const double tiny = 1e-24 * std::max(1.0, y.squaredNorm());
  if (r.tss <= tiny) {
    r.tss = 0.0;
    r.R2 = 0.0;
    r.F = 0.0;
    r.p = 1.0;
    return r;
  }
  r.R2 = std::clamp(1.0 - r.rss / r.tss, 0.0, 1.0);
  if (r.df_model == 0) {
    r.F = 0.0;
    r.p = 1.0;
    return r;
  }
  r.F = f_stat(r.tss - r.rss, static_cast<double>(r.df_model), r.rss <= tiny ? 0.0 : r.rss,
               static_cast<double>(r.df_resid));
  r.p = f_tail(r.F, static_cast<double>(r.df_model), static_cast<double>(r.df_resid));
  return r;
}

RegressionResult partial_f_test(const DesignMatrix& design, const Eigen::VectorXd& y,
                                const std::vector<std::size_t>& tested_columns) {
  if (tested_columns.empty()) throw ValidationError("no columns to test");
  RegressionResult full = ols_fit(design, y);

  const auto p = design.X.cols();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < p; ++c) {
    if (std::find(tested_columns.begin(), tested_columns.end(), static_cast<std::size_t>(c)) == tested_columns.end())
      keep.push_back(c);
    else if (c == 0)
      throw ValidationError("the intercept cannot be tested");
  }
  Eigen::MatrixXd reduced(design.X.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) reduced.col(static_cast<Eigen::Index>(i)) = design.X.col(keep[i]);
  const double rss_reduced = least_squares(reduced, y).rss;

  const double q = static_cast<double>(tested_columns.size());
  full.F = f_stat(std::max(0.0, rss_reduced - full.rss), q, full.rss, static_cast<double>(full.df_resid));
  full.p = f_tail(full.F, q, static_cast<double>(full.df_resid));
  full.df_model = tested_columns.size();
  full.tested = tested_columns.front();
  return full;
}

std::vector<CellScore> cell_scores(const std::vector<Classification>& classifications) {
  const GroupBy all = GroupBy::of({Dimension::Model, Dimension::Bias, Dimension::Level, Dimension::Temperature});
  std::vector<CellScore> out;
  for (const ResistanceScore& row : resistance(classifications, all)) {
    if (!row.score()) continue;
    out.push_back({*row.key.model, *row.key.bias, *row.key.level, *row.key.temperature, *row.score()});
  }
  return out;
}

RegressionResult anova_temperature(const std::vector<CellScore>& cells, BiasCategory bias) {
  std::vector<const CellScore*> rows;
  for (const CellScore& c : cells) {
    if (c.bias == bias) rows.push_back(&c);
  }
  if (rows.empty()) throw ValidationError(fmt::format("no cells for bias '{}'", to_string(bias)));

  std::map<std::string, std::set<double>> temps_by_model;
  for (const CellScore* c : rows) temps_by_model[c->model_id].insert(c->temperature);
  const bool varies = std::any_of(temps_by_model.begin(), temps_by_model.end(),
                                  [](const auto& kv) { return kv.second.size() >= 2; });
  if (!varies) throw ValidationError("insufficient variation in temperature within any model");

  std::vector<std::string> models;
  for (const auto& [m, _] : temps_by_model) models.push_back(m);

  DesignMatrix d;
  d.columns = {"intercept", "temperature"};
  for (std::size_t i = 1; i < models.size(); ++i) d.columns.push_back("model=" + models[i]);
  d.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d.columns.size()));
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    d.X(ri, 0) = 1.0;
    d.X(ri, 1) = rows[r]->temperature;
    auto it = std::find(models.begin(), models.end(), rows[r]->model_id);
    const auto m = static_cast<Eigen::Index>(it - models.begin());
    if (m > 0) d.X(ri, 1 + m) = 1.0;
    y[ri] = rows[r]->score;
  }
  return partial_f_test(d, y, {1});
}

namespace {

RegressionResult regress_on_trait(const std::vector<CellScore>& cells, std::optional<BiasCategory> bias,
                                  const std::string& column, const std::function<std::optional<double>(const std::string&)>& value) {
  std::vector<std::pair<double, double>> obs;
  std::set<double> distinct;
  for (const CellScore& c : cells) {
    if (bias && c.bias != *bias) continue;
    auto v = value(c.model_id);
    if (!v) continue;
    obs.emplace_back(*v, c.score);
    distinct.insert(*v);
  }
  if (distinct.size() < 2) throw ValidationError(fmt::format("insufficient variation in {}", column));
  DesignMatrix d;
  d.columns = {"intercept", column};
  d.X.resize(static_cast<Eigen::Index>(obs.size()), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto ri = static_cast<Eigen::Index>(i);
    d.X(ri, 0) = 1.0;
    d.X(ri, 1) = obs[i].first;
    y[ri] = obs[i].second;
  }
  RegressionResult r = ols_fit(d, y);
  r.tested = 1;
  return r;
}

}  // namespace

RegressionResult regress_size(const std::vector<CellScore>& cells, const std::map<std::string, ModelTraits>& traits,
                              std::optional<BiasCategory> bias) {
  return regress_on_trait(cells, bias, "log10_params", [&](const std::string& model) -> std::optional<double> {
    auto it = traits.find(model);
    if (it == traits.end() || !it->second.params_billions || *it->second.params_billions <= 0) return std::nullopt;
    return std::log10(*it->second.params_billions * 1e9);
  });
}

RegressionResult regress_reasoning(const std::vector<CellScore>& cells,
                                   const std::map<std::string, ModelTraits>& traits,
                                   std::optional<BiasCategory> bias) {
  return regress_on_trait(cells, bias, "reasoning", [&](const std::string& model) -> std::optional<double> {
    auto it = traits.find(model);
    if (it == traits.end() || !it->second.reasoning) return std::nullopt;
    return *it->second.reasoning ? 1.0 : 0.0;
  });
}

}  // namespace biasbench
