#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "l2div/dr_engine.hpp"
#include "l2div/parallel.hpp"

namespace l2div {

// ---------------------------------------------------------------------------
// Finite-difference divergence

/// sum_i [mu_i(y + h e_i) - mu_i(y - h e_i)] / 2h. The refit must hold the tuning
/// value fixed. A non-positive step selects 1e-5 (1 + max |y_i|).
template <typename Scalar>
Scalar fd_divergence(const std::function<Vec<Scalar>(const Vec<Scalar>&)>& refit, const Vec<Scalar>& y,
                     Scalar h = 0) {
  if (!(h > 0)) h = Scalar(1e-5) * (Scalar(1) + y.cwiseAbs().maxCoeff());
  Scalar total = 0;
  Vec<Scalar> probe = y;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    probe(i) = y(i) + h;
    const Scalar up = refit(probe)(i);
    probe(i) = y(i) - h;
    const Scalar down = refit(probe)(i);
    probe(i) = y(i);
    total += (up - down) / (2 * h);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Exact divergence of the constrained estimator by implicit differentiation of
// gamma = (I + lambda C)^{-1} z subject to gamma' C gamma = rho.

template <typename Scalar>
Scalar implicit_divergence(const DRSystem<Scalar>& sys, const ConstraintFit<Scalar>& fit) {
  if (!fit.active) return Scalar(sys.d());
  const auto shrink = (Scalar(1) / (Scalar(1) + fit.lambda_star * sys.c.array())).eval();
  const auto normal = (sys.c.array() * fit.gamma.array()).eval();
  const Scalar num = (normal.square() * shrink.square()).sum();
  const Scalar den = (normal.square() * shrink).sum();
  return shrink.sum() - num / den;
}

// ---------------------------------------------------------------------------
// Monte-Carlo degrees of freedom

template <typename Scalar>
struct DFEstimate {
  Scalar estimate = 0;
  Scalar std_error = 0;
  std::size_t replicates = 0;
};

/// Covariance-penalty estimate (1/sigma^2) sum_i cov(mu_hat_i, y_i) with a
/// replicate-level jackknife standard error. `draw(m)` must be a pure function of m.
template <typename Scalar>
DFEstimate<Scalar> mc_degrees_of_freedom(const Vec<Scalar>& mean, Scalar sigma2,
                                         const std::function<Vec<Scalar>(std::size_t)>& draw,
                                         const std::function<Vec<Scalar>(const Vec<Scalar>&)>& fitter,
                                         std::size_t replicates, unsigned jobs = 1) {
  require(replicates >= 100, ErrorCode::InsufficientReplicates, "Monte-Carlo DF needs at least 100 replicates");
  require(sigma2 > 0, ErrorCode::InvalidArgument, "noise variance must be positive");
  const Eigen::Index n = mean.size();
  const std::size_t M = replicates;
  Mat<Scalar> fitted(n, M), noise(n, M);
  parallel_for(M, jobs, [&](std::size_t m) {
    const Vec<Scalar> y = draw(m);
    noise.col(m) = y - mean;
    fitted.col(m) = fitter(y);
  });

  const Vec<Scalar> sum_fit = fitted.rowwise().sum();
  const Vec<Scalar> sum_noise = noise.rowwise().sum();
  const Vec<Scalar> sum_cross = fitted.cwiseProduct(noise).rowwise().sum();

  // sum_i (1/(K-1)) sum_k (f_ik - fbar_i) e_ik over a replicate set of size K
  const auto covariance_sum = [&](const Vec<Scalar>& sf, const Vec<Scalar>& se, const Vec<Scalar>& sc,
                                  Scalar count) {
    return ((sc.array() - sf.array() / count * se.array()).sum()) / (count - 1);
  };

  DFEstimate<Scalar> out;
  out.replicates = M;
  out.estimate = covariance_sum(sum_fit, sum_noise, sum_cross, Scalar(M)) / sigma2;

  std::vector<Scalar> loo(M);
  for (std::size_t m = 0; m < M; ++m) {
    const Vec<Scalar> sf = sum_fit - fitted.col(m);
    const Vec<Scalar> se = sum_noise - noise.col(m);
    const Vec<Scalar> sc = sum_cross - fitted.col(m).cwiseProduct(noise.col(m));
    loo[m] = covariance_sum(sf, se, sc, Scalar(M - 1)) / sigma2;
  }
  Scalar mean_loo = 0;
  for (Scalar v : loo) mean_loo += v;
  mean_loo /= Scalar(M);
  Scalar ss = 0;
  for (Scalar v : loo) ss += (v - mean_loo) * (v - mean_loo);
  out.std_error = std::sqrt(Scalar(M - 1) / Scalar(M) * ss);
  return out;
}

// ---------------------------------------------------------------------------
// Explicit hat matrix

inline constexpr Eigen::Index kMaxDirectDimension = 200;

/// trace of N (N'N + lambda Omega)^{-1} N', formed densely.
template <typename Scalar>
Scalar trace_hat_direct(const RegressionProblem<Scalar>& problem, Scalar lambda) {
  require(problem.d() <= kMaxDirectDimension, ErrorCode::ProblemTooLarge,
          "explicit hat matrix limited to d <= 200");
  require(lambda >= 0, ErrorCode::NegativeLambda, "lambda must be >= 0");
  const Mat<Scalar>& N = problem.design;
  const Mat<Scalar> system = N.transpose() * N + lambda * problem.penalty;
  Eigen::LLT<Mat<Scalar>> llt(system);
  require(llt.info() == Eigen::Success, ErrorCode::SingularSystem, "N'N + lambda Omega is not invertible");
  const Mat<Scalar> hat = N * llt.solve(N.transpose());
  return hat.trace();
}

// ---------------------------------------------------------------------------
// Boundary geometry of the ellipsoid sum_j c_j gamma_j^2 = rho

template <typename Scalar>
struct PolarChart {
  Vec<Scalar> theta;  // r - 1 angles
  Vec<Scalar> nu;     // r, normal direction
  Mat<Scalar> L;      // r x (r - 1) tangent frame
  Mat<Scalar> G11;    // first fundamental form
  Mat<Scalar> H11;    // second fundamental form, scaled by tau
  Scalar rho = 0;
  Scalar tau = 0;
};

namespace detail {

// Point on the unit sphere in R^{r} from r - 1 angles, cosine-leading.
template <typename Scalar>
Vec<Scalar> sphere_point(const Vec<Scalar>& theta) {
  const Eigen::Index r = theta.size() + 1;
  Vec<Scalar> s(r);
  Scalar prefix = 1;
  for (Eigen::Index k = 0; k + 1 < r; ++k) {
    s(k) = prefix * std::cos(theta(k));
    prefix *= std::sin(theta(k));
  }
  s(r - 1) = prefix;
  return s;
}

// d s / d theta_j.
template <typename Scalar>
Vec<Scalar> sphere_tangent(const Vec<Scalar>& theta, Eigen::Index j) {
  const Eigen::Index r = theta.size() + 1;
  Vec<Scalar> v = Vec<Scalar>::Zero(r);
  Scalar prefix = 1;
  for (Eigen::Index l = 0; l < j; ++l) prefix *= std::sin(theta(l));
  v(j) = -prefix * std::sin(theta(j));
  Scalar running = prefix * std::cos(theta(j));
  for (Eigen::Index k = j + 1; k < r; ++k) {
    v(k) = (k + 1 < r) ? running * std::cos(theta(k)) : running;
    if (k + 1 < r) running *= std::sin(theta(k));
  }
  return v;
}

}  // namespace detail

/// Boundary point gamma(theta) = sqrt(rho) diag(c)^{-1/2} u(theta) on the penalized block.
template <typename Scalar>
Vec<Scalar> chart_point(const Vec<Scalar>& c, Scalar rho, const Vec<Scalar>& theta) {
  return std::sqrt(rho) * detail::sphere_point(theta).cwiseQuotient(c.cwiseSqrt());
}

/// Spherical chart, tangent frame and fundamental forms at an active constraint fit.
template <typename Scalar>
PolarChart<Scalar> polar_chart(const DRSystem<Scalar>& sys, const ConstraintFit<Scalar>& fit) {
  require(fit.active, ErrorCode::InactiveFit, "geometry needs an active constraint");
  const Eigen::Index r = sys.rank;
  require(r >= 2, ErrorCode::SingularChart, "chart needs at least two penalized directions");
  const Vec<Scalar> c = sys.c.head(r);
  const Scalar rho = fit.rho;

  Vec<Scalar> w = c.cwiseSqrt().cwiseProduct(fit.gamma.head(r)) / std::sqrt(rho);
  w /= w.norm();

  PolarChart<Scalar> chart;
  chart.rho = rho;
  chart.tau = fit.tau;
  chart.theta.resize(r - 1);
  for (Eigen::Index j = 0; j + 2 < r; ++j)
    chart.theta(j) = std::atan2(w.tail(r - j - 1).norm(), w(j));
  chart.theta(r - 2) = std::atan2(w(r - 1), w(r - 2));
  for (Eigen::Index j = 0; j + 2 < r; ++j)
    require(std::sin(chart.theta(j)) >= Scalar(1e-6), ErrorCode::SingularChart,
            "boundary point sits on a coordinate singularity");

  const Vec<Scalar> s = detail::sphere_point(chart.theta);
  chart.nu = c.cwiseSqrt().cwiseProduct(s);
  chart.L.resize(r, r - 1);
  for (Eigen::Index j = 0; j + 1 < r; ++j)
    chart.L.col(j) = std::sqrt(rho) * detail::sphere_tangent(chart.theta, j);

  chart.G11 = chart.L.transpose() * c.cwiseInverse().asDiagonal() * chart.L;
  chart.H11 = (fit.tau / (std::sqrt(rho) * chart.nu.norm())) * (chart.L.transpose() * chart.L);
  return chart;
}

/// Eigenvalues of the pencil (H11, G11) in ascending order.
template <typename Scalar>
Vec<Scalar> geometric_phi(const DRSystem<Scalar>& sys, const ConstraintFit<Scalar>& fit,
                          PolarChart<Scalar>* chart_out = nullptr) {
  PolarChart<Scalar> chart = polar_chart(sys, fit);
  Eigen::LLT<Mat<Scalar>> whitening(chart.G11);
  require(whitening.info() == Eigen::Success, ErrorCode::NonPDFirstForm, "first fundamental form is not PD");
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat<Scalar>> pencil(chart.H11, chart.G11);
  require(pencil.info() == Eigen::Success, ErrorCode::ConvergenceFailure, "pencil eigensolver failed");
  Vec<Scalar> phi = pencil.eigenvalues();
  if (chart_out) *chart_out = std::move(chart);
  return phi;
}

}  // namespace l2div
