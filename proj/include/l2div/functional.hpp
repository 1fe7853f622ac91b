#pragma once

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "l2div/problem.hpp"

namespace l2div {

inline constexpr std::string_view kSobolevKernel = "sobolev2";

/// Reproducing kernel of the second order Sobolev space on [0,1] modulo linear functions:
/// K(s,t) = k2(s) k2(t) - k4(|s - t|).
template <typename Scalar>
Scalar sobolev_kernel(Scalar s, Scalar t) {
  const auto k2 = [](Scalar u) { return (u * u - u + Scalar(1) / 6) / 2; };
  const auto k4 = [](Scalar u) {
    const Scalar u2 = u * u;
    return (u2 * u2 - 2 * u2 * u + u2 - Scalar(1) / 30) / 24;
  };
  return k2(s) * k2(t) - k4(std::abs(s - t));
}

template <typename Scalar>
struct FunctionalDesign {
  Vec<Scalar> grid;        // m quadrature points
  Mat<Scalar> curves;      // n x m
  Vec<Scalar> mean_curve;  // m
  Mat<Scalar> Sigma;       // n x n
  Mat<Scalar> T;           // n x 2
  Mat<Scalar> Q2;          // n x (n - 3), orthogonal to (1 : T)
  std::string kernel;
};

/// Composite trapezoid weights on a uniform grid covering [0,1].
template <typename Scalar>
Vec<Scalar> trapezoid_weights(const Vec<Scalar>& grid) {
  const Eigen::Index m = grid.size();
  require(m >= 21, ErrorCode::GridError, "functional grid needs at least 21 points");
  const Scalar h = Scalar(1) / Scalar(m - 1);
  require(std::abs(grid(0)) <= Scalar(1e-9) && std::abs(grid(m - 1) - 1) <= Scalar(1e-9),
          ErrorCode::GridError, "grid must span [0,1]");
  for (Eigen::Index k = 1; k < m; ++k)
    require(std::abs(grid(k) - grid(k - 1) - h) <= Scalar(1e-6) * h, ErrorCode::GridError,
            "grid is not uniform at index " + std::to_string(k));
  Vec<Scalar> w = Vec<Scalar>::Constant(m, h);
  w(0) = w(m - 1) = h / 2;
  return w;
}

/// Scalar-on-function regression with the RKHS representer expansion.
///
/// Coefficients are ordered (eta, d_1, d_2, alpha): the representer weights c = Q2 eta,
/// the two linear slope terms and the intercept. The design is (Sigma Q2 : T : 1) and the
/// penalty diag(Q2' Sigma Q2, 0_3), so that c' Sigma c is the roughness of the slope function.
template <typename DerivedC, typename DerivedG, typename DerivedY>
std::pair<RegressionProblem<typename DerivedC::Scalar>, FunctionalDesign<typename DerivedC::Scalar>>
build_functional(const Eigen::MatrixBase<DerivedC>& curves, const Eigen::MatrixBase<DerivedG>& grid,
                 const Eigen::MatrixBase<DerivedY>& y, std::string_view kernel = kSobolevKernel) {
  using Scalar = typename DerivedC::Scalar;
  require(kernel == kSobolevKernel, ErrorCode::KernelError, "unknown kernel '" + std::string(kernel) + "'");
  const Eigen::Index n = curves.rows(), m = curves.cols();
  require(grid.size() == m, ErrorCode::DimensionMismatch, "curve samples must match the grid length");
  require(y.size() == n, ErrorCode::LengthMismatch, "one response per curve");
  require(n >= 5, ErrorCode::TooFewPoints, "functional regression needs at least 5 curves");
  require(curves.allFinite() && grid.allFinite() && y.allFinite(), ErrorCode::DomainError,
          "non-finite input");

  FunctionalDesign<Scalar> fd;
  fd.grid = grid;
  fd.curves = curves;
  fd.kernel = std::string(kernel);
  const Vec<Scalar> w = trapezoid_weights(fd.grid);

  fd.mean_curve = fd.curves.colwise().mean().transpose();
  const Mat<Scalar> centered = fd.curves.rowwise() - fd.mean_curve.transpose();
  const Scalar scale = fd.curves.cwiseAbs().maxCoeff();
  require(centered.cwiseAbs().maxCoeff() > Scalar(1e-12) * std::max(scale, Scalar(1)),
          ErrorCode::DegenerateDesign, "all curves coincide after centering");

  Mat<Scalar> kmat(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) kmat(a, b) = sobolev_kernel(fd.grid(a), fd.grid(b));

  const Mat<Scalar> weighted = centered * w.asDiagonal();
  fd.Sigma = weighted * kmat * weighted.transpose();
  symmetrize(fd.Sigma);

  fd.T.resize(n, 2);
  fd.T.col(0) = weighted.rowwise().sum();
  fd.T.col(1) = weighted * fd.grid;

  Mat<Scalar> fixed(n, 3);
  fixed.col(0).setOnes();
  fixed.rightCols(2) = fd.T;
  Eigen::HouseholderQR<Mat<Scalar>> qr(fixed);
  const Mat<Scalar> q = qr.householderQ() * Mat<Scalar>::Identity(n, n);
  fd.Q2 = q.rightCols(n - 3);

  RegressionProblem<Scalar> p;
  p.kind = ProblemKind::FunctionalLinear;
  p.y = y;
  p.meta.quadrature_grid = fd.grid;
  p.meta.kernel = fd.kernel;
  p.design.resize(n, n);
  p.design.leftCols(n - 3) = fd.Sigma * fd.Q2;
  p.design.col(n - 3) = fd.T.col(0);
  p.design.col(n - 2) = fd.T.col(1);
  p.design.col(n - 1).setOnes();
  p.penalty = Mat<Scalar>::Zero(n, n);
  p.penalty.topLeftCorner(n - 3, n - 3) = fd.Q2.transpose() * fd.Sigma * fd.Q2;
  symmetrize(p.penalty);
  return {std::move(p), std::move(fd)};
}

}  // namespace l2div
