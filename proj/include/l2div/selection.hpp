#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "l2div/dr_engine.hpp"

namespace l2div {

enum class Indexing { Lambda, Rho };
enum class AicForm { Paper, Classical };

constexpr std::string_view to_string(Indexing ix) { return ix == Indexing::Lambda ? "lambda" : "rho"; }

/// log(RSS) + 2 div, or the classical n log(RSS/n) + 2 div.
template <typename Scalar>
Scalar aic(Scalar rss, Scalar div, AicForm form = AicForm::Paper, Eigen::Index n = 0) {
  require(rss > 0, ErrorCode::NonPositiveRSS, "AIC needs a positive residual sum of squares");
  if (form == AicForm::Classical) {
    require(n > 0, ErrorCode::InvalidArgument, "classical AIC needs the sample size");
    return Scalar(n) * std::log(rss / Scalar(n)) + 2 * div;
  }
  return std::log(rss) + 2 * div;
}

template <typename Scalar>
Scalar gcv(Scalar rss, Scalar div, Eigen::Index n) {
  require(div < Scalar(n), ErrorCode::DivergenceExceedsN, "divergence reaches the sample size");
  const Scalar slack = Scalar(n) - div;
  return rss / (slack * slack);
}

template <typename Scalar>
struct CriterionTable {
  Indexing indexing = Indexing::Lambda;
  std::vector<Scalar> grid;
  std::vector<Scalar> rss;
  std::vector<Scalar> div;
  std::vector<Scalar> aic;
  std::vector<Scalar> gcv;
  std::vector<Scalar> counterpart;  // rho(lambda) for lambda tables, lambda*(rho) for rho tables
  std::vector<Vec<Scalar>> mu;
  std::size_t chosen_aic = 0;
  std::size_t chosen_gcv = 0;

  std::size_t size() const { return grid.size(); }
};

namespace detail {

// First index of the minimum, so ties go to the smallest theta.
template <typename Scalar>
std::size_t argmin(const std::vector<Scalar>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[best]) best = i;
  return best;
}

}  // namespace detail

template <typename Scalar, typename DerivedY>
CriterionTable<Scalar> evaluate_grid(const DRSystem<Scalar>& sys, const Eigen::MatrixBase<DerivedY>& y,
                                     const std::vector<Scalar>& grid, Indexing indexing,
                                     AicForm form = AicForm::Paper) {
  require(!grid.empty(), ErrorCode::GridError, "empty tuning grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(grid[i] > 0 && std::isfinite(grid[i]), ErrorCode::GridError, "grid values must be positive");
    if (i > 0) require(grid[i] > grid[i - 1], ErrorCode::GridError, "grid must be strictly increasing");
  }
  const Eigen::Index n = sys.n();
  CriterionTable<Scalar> t;
  t.indexing = indexing;
  t.grid = grid;
  for (Scalar theta : grid) {
    Scalar rss, div, other;
    Vec<Scalar> mu;
    if (indexing == Indexing::Lambda) {
      auto fit = fit_penalty(sys, y, theta);
      rss = fit.rss;
      div = fit.div_lambda;
      other = fit.rho_induced;
      mu = std::move(fit.mu);
    } else {
      auto fit = fit_constraint(sys, y, theta);
      rss = fit.rss;
      div = fit.div_rho;
      other = fit.lambda_star;
      mu = std::move(fit.mu);
    }
    t.rss.push_back(rss);
    t.div.push_back(div);
    t.aic.push_back(aic(rss, div, form, n));
    t.gcv.push_back(gcv(rss, div, n));
    t.counterpart.push_back(other);
    t.mu.push_back(std::move(mu));
  }
  t.chosen_aic = detail::argmin(t.aic);
  t.chosen_gcv = detail::argmin(t.gcv);
  return t;
}

template <typename Scalar>
struct LossCurve {
  std::vector<Scalar> rho_grid;
  std::vector<Scalar> loss;
  Scalar min_loss = 0;
  Scalar max_loss = 0;
};

/// Per-grid-point average squared error of fitted values against the truth.
template <typename Scalar, typename DerivedT>
LossCurve<Scalar> loss_curve(const std::vector<Scalar>& rho_grid, const std::vector<Vec<Scalar>>& fits,
                             const Eigen::MatrixBase<DerivedT>& truth) {
  require(rho_grid.size() == fits.size() && !fits.empty(), ErrorCode::LengthMismatch,
          "one fit per grid point required");
  LossCurve<Scalar> curve;
  curve.rho_grid = rho_grid;
  for (const auto& f : fits) {
    require(f.size() == truth.size(), ErrorCode::LengthMismatch, "fit and truth lengths differ");
    curve.loss.push_back((f - truth).squaredNorm() / Scalar(truth.size()));
  }
  curve.min_loss = *std::min_element(curve.loss.begin(), curve.loss.end());
  curve.max_loss = *std::max_element(curve.loss.begin(), curve.loss.end());
  return curve;
}

/// 100 (loss - min) / (max - min), clamped to [0, 100].
template <typename Scalar>
Scalar relative_error(Scalar loss_at_chosen, const LossCurve<Scalar>& curve) {
  require(curve.max_loss > curve.min_loss, ErrorCode::FlatLossCurve, "loss curve is flat");
  const Scalar v = 100 * (loss_at_chosen - curve.min_loss) / (curve.max_loss - curve.min_loss);
  return std::clamp(v, Scalar(0), Scalar(100));
}

}  // namespace l2div
