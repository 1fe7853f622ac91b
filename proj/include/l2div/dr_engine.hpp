#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "l2div/problem.hpp"

namespace l2div {

/// Relative threshold below which penalty eigenvalues are treated as exact zeros.
inline constexpr double kRankTolerance = 1e-10;

/// Demmler-Reinsch form of a penalized least squares problem: N = Z (B'U)^{-1} with
/// Z'Z = I and the penalty diagonal, beta' Omega beta = gamma' diag(c) gamma.
template <typename Scalar>
struct DRSystem {
  Mat<Scalar> Z;               // n x d, orthonormal columns
  Vec<Scalar> c;               // d, non-increasing, exact zeros past rank
  Eigen::Index rank = 0;       // number of positive eigenvalues
  Mat<Scalar> back_transform;  // d x d, beta = back_transform * gamma

  Eigen::Index n() const { return Z.rows(); }
  Eigen::Index d() const { return Z.cols(); }
};

template <typename Scalar>
struct PenaltyFit {
  Scalar lambda = 0;
  Vec<Scalar> gamma;
  Vec<Scalar> beta;
  Vec<Scalar> mu;
  Scalar rss = 0;
  Scalar div_lambda = 0;
  Scalar rho_induced = 0;
};

template <typename Scalar>
struct ConstraintFit {
  Scalar rho = 0;
  bool active = false;
  Scalar lambda_star = 0;
  Vec<Scalar> gamma;
  Vec<Scalar> gamma0;
  Vec<Scalar> beta;
  Scalar tau = 0;
  Vec<Scalar> phi;
  Vec<Scalar> mu;
  Scalar rss = 0;
  Scalar div_rho = 0;
  std::vector<std::string> warnings;
};

/// Thin QR of the design followed by a symmetric eigendecomposition of R^{-T} Omega R^{-1}.
template <typename Scalar>
DRSystem<Scalar> decompose(const RegressionProblem<Scalar>& problem) {
  validate_problem(problem);
  const Eigen::Index n = problem.n(), d = problem.d();
  require(n >= d, ErrorCode::RankDeficientDesign,
          "design has more columns (" + std::to_string(d) + ") than rows (" + std::to_string(n) + ")");

  Eigen::HouseholderQR<Mat<Scalar>> qr(problem.design);
  const Mat<Scalar> R = qr.matrixQR().topLeftCorner(d, d).template triangularView<Eigen::Upper>();
  const Vec<Scalar> rdiag = R.diagonal().cwiseAbs();
  require(rdiag.minCoeff() > Scalar(kRankTolerance) * rdiag.maxCoeff(), ErrorCode::RankDeficientDesign,
          "design is numerically rank deficient");
  const Mat<Scalar> Q = qr.householderQ() * Mat<Scalar>::Identity(n, d);

  // M = R^{-T} Omega R^{-1}
  const auto upper = R.template triangularView<Eigen::Upper>();
  Mat<Scalar> right = upper.transpose().solve(problem.penalty);  // R^{-T} Omega
  Mat<Scalar> M = upper.transpose().solve(right.transpose());    // R^{-T} (R^{-T} Omega)' = R^{-T} Omega R^{-1}
  symmetrize(M);

  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(M);
  require(eig.info() == Eigen::Success, ErrorCode::ConvergenceFailure, "eigensolver failed");
  const Vec<Scalar> ascending = eig.eigenvalues();
  const Scalar top = std::max(ascending(d - 1), Scalar(0));
  require(ascending(0) >= -Scalar(1e-8) * top, ErrorCode::NonPSDPenalty, "penalty is not PSD");

  DRSystem<Scalar> sys;
  sys.c = ascending.reverse();
  const Mat<Scalar> U = eig.eigenvectors().rowwise().reverse();
  sys.rank = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (top > 0 && sys.c(j) > Scalar(kRankTolerance) * top)
      ++sys.rank;
    else
      sys.c(j) = 0;
  }
  sys.Z = Q * U;
  sys.back_transform = upper.solve(U);
  return sys;
}

/// Full trace of the hat matrix, (d - r) + sum_j 1 / (1 + lambda c_j).
template <typename Scalar>
Scalar div_lambda(const DRSystem<Scalar>& sys, Scalar lambda) {
  require(lambda >= 0 && std::isfinite(lambda), ErrorCode::NegativeLambda, "lambda must be finite and >= 0");
  return (Scalar(1) / (Scalar(1) + lambda * sys.c.array())).sum();
}

/// Same quantity as div_lambda, kept separate for the trace identity tests.
template <typename Scalar>
Scalar hat_trace_identity_check(const DRSystem<Scalar>& sys, Scalar lambda) {
  return div_lambda(sys, lambda);
}

template <typename Scalar, typename DerivedY>
PenaltyFit<Scalar> fit_penalty(const DRSystem<Scalar>& sys, const Eigen::MatrixBase<DerivedY>& y,
                               Scalar lambda) {
  require(lambda >= 0 && std::isfinite(lambda), ErrorCode::NegativeLambda, "lambda must be finite and >= 0");
  require(y.size() == sys.n(), ErrorCode::LengthMismatch, "response length does not match the system");
  PenaltyFit<Scalar> fit;
  fit.lambda = lambda;
  const Vec<Scalar> z = sys.Z.transpose() * y;
  fit.gamma = z.array() / (Scalar(1) + lambda * sys.c.array());
  fit.beta = sys.back_transform * fit.gamma;
  fit.mu = sys.Z * fit.gamma;
  fit.rss = (y - fit.mu).squaredNorm();
  fit.div_lambda = div_lambda(sys, lambda);
  fit.rho_induced = (sys.c.array() * fit.gamma.array().square()).sum();
  return fit;
}

/// Closed-form curvature terms phi_j, j = 1..r-1, for a boundary point gamma.
/// Adjacent pairs with both components zero take the equal-weight limit; their
/// indices are appended to `degenerate` when it is supplied.
template <typename Scalar>
Vec<Scalar> phi_values(const DRSystem<Scalar>& sys, const Vec<Scalar>& gamma, Scalar tau,
                       std::vector<Eigen::Index>* degenerate = nullptr) {
  const Eigen::Index r = sys.rank;
  if (r < 2) return Vec<Scalar>(0);
  const auto c = sys.c.head(r).array();
  const auto g = gamma.head(r).array();
  const Scalar weight_norm = std::sqrt((g.square() * c.square()).sum());
  require(weight_norm > 0, ErrorCode::AllPenalizedComponentsZero,
          "boundary point has no penalized component");

  Vec<Scalar> phi(r - 1);
  const Scalar lead = tau / weight_norm;
  for (Eigen::Index j = 0; j + 1 < r; ++j) {
    const Scalar cj = c(j), ck = c(j + 1);
    const Scalar aj = cj * cj * g(j) * g(j), ak = ck * ck * g(j + 1) * g(j + 1);
    const Scalar den = aj + ak;
    Scalar ratio;
    if (den > std::numeric_limits<Scalar>::min()) {
      ratio = (ck * aj + cj * ak) / den;
    } else {
      ratio = cj * ck * (cj + ck) / (cj * cj + ck * ck);
      if (degenerate) degenerate->push_back(j);
    }
    phi(j) = lead * ratio;
  }
  return phi;
}

/// (d - r) + sum_{j<r} 1 / (1 + phi_j) for an active constraint fit.
template <typename Scalar>
Scalar div_rho(const ConstraintFit<Scalar>& fit, const DRSystem<Scalar>& sys) {
  require(fit.active, ErrorCode::InactiveFit, "constraint is inactive; divergence is d");
  return Scalar(sys.d() - sys.rank) + (Scalar(1) / (Scalar(1) + fit.phi.array())).sum();
}

namespace detail {

template <typename Scalar>
Scalar induced_rho(const Vec<Scalar>& c, const Vec<Scalar>& z, Scalar lambda) {
  return (c.array() * (z.array() / (Scalar(1) + lambda * c.array())).square()).sum();
}

}  // namespace detail

/// Minimizes ||y - Z gamma||^2 subject to gamma' C gamma <= rho. An active constraint
/// is solved through its Lagrange multiplier by bracketing and bisection.
template <typename Scalar, typename DerivedY>
ConstraintFit<Scalar> fit_constraint(const DRSystem<Scalar>& sys, const Eigen::MatrixBase<DerivedY>& y,
                                     Scalar rho) {
  require(rho > 0 && std::isfinite(rho), ErrorCode::NonPositiveRho, "rho must be finite and > 0");
  require(y.size() == sys.n(), ErrorCode::LengthMismatch, "response length does not match the system");
  ConstraintFit<Scalar> fit;
  fit.rho = rho;
  fit.gamma0 = sys.Z.transpose() * y;
  const Vec<Scalar>& z = fit.gamma0;

  if (detail::induced_rho(sys.c, z, Scalar(0)) <= rho) {
    fit.active = false;
    fit.gamma = z;
    fit.tau = 0;
    fit.div_rho = Scalar(sys.d());
  } else {
    fit.active = true;
    Scalar lo = 0, hi = 1;
    int doublings = 0;
    while (detail::induced_rho(sys.c, z, hi) > rho) {
      lo = hi;
      hi *= 2;
      require(++doublings < 2000, ErrorCode::ConvergenceFailure, "could not bracket the multiplier");
    }
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
      const Scalar mid = lo + (hi - lo) / 2;
      if (mid <= lo || mid >= hi) {
        converged = true;
        break;
      }
      if (detail::induced_rho(sys.c, z, mid) > rho)
        lo = mid;
      else
        hi = mid;
      if (hi - lo <= Scalar(1e-13) * hi) {
        converged = true;
        break;
      }
    }
    require(converged, ErrorCode::ConvergenceFailure, "bisection did not converge");
    fit.lambda_star = lo + (hi - lo) / 2;
    fit.gamma = z.array() / (Scalar(1) + fit.lambda_star * sys.c.array());
    fit.tau = (z - fit.gamma).norm();

    std::vector<Eigen::Index> degenerate;
    fit.phi = phi_values(sys, fit.gamma, fit.tau, &degenerate);
    for (auto j : degenerate)
      fit.warnings.push_back("phi_" + std::to_string(j + 1) +
                             ": adjacent components vanish, equal-weight limit used");
    fit.div_rho = div_rho(fit, sys);
  }
  fit.beta = sys.back_transform * fit.gamma;
  fit.mu = sys.Z * fit.gamma;
  fit.rss = (y - fit.mu).squaredNorm();
  return fit;
}

}  // namespace l2div
