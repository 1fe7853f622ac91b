#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "l2div/bspline.hpp"
#include "l2div/problem.hpp"

namespace l2div {

/// Cubic smoothing spline with the integrated squared second derivative penalty.
/// The design is the natural cubic spline basis evaluated at x, so d = n.
template <typename DerivedX, typename DerivedY>
RegressionProblem<typename DerivedX::Scalar> build_smoothing_spline(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Index n = x.size();
  require(n >= 4, ErrorCode::TooFewPoints, "smoothing spline needs at least 4 points");
  require(y.size() == n, ErrorCode::LengthMismatch, "x and y lengths differ");
  require(x.allFinite() && y.allFinite(), ErrorCode::DomainError, "non-finite input");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(x(i) >= 0 && x(i) <= 1, ErrorCode::DomainError,
            "abscissa " + std::to_string(i) + " outside [0,1]");
    if (i > 0) {
      require(x(i) != x(i - 1), ErrorCode::DuplicateAbscissae,
              "tied abscissae at index " + std::to_string(i));
      require(x(i) > x(i - 1), ErrorCode::DomainError, "abscissae must be increasing");
    }
  }

  const Vec<Scalar> xs = x;
  const CubicBSplineBasis<Scalar> basis(xs);
  const Mat<Scalar> transform = natural_spline_transform(basis);

  Mat<Scalar> collocation(n, basis.size());
  for (Eigen::Index i = 0; i < n; ++i) collocation.row(i) = basis.row(xs(i)).transpose();

  RegressionProblem<Scalar> p;
  p.kind = ProblemKind::SmoothingSpline;
  p.y = y;
  p.abscissae = xs;
  p.design = collocation * transform;
  p.penalty = transform.transpose() * basis.second_derivative_gram() * transform;
  symmetrize(p.penalty);
  return p;
}

/// Truncated power basis (1, x, ..., x^p, (x - k_1)_+^p, ..., (x - k_K)_+^p) with the
/// ridge penalty on the K truncated-power coefficients.
template <typename DerivedX, typename DerivedY, typename DerivedK>
RegressionProblem<typename DerivedX::Scalar> build_penalized_spline(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y, int degree,
    const Eigen::MatrixBase<DerivedK>& knots) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Index n = x.size();
  const Eigen::Index num_knots = knots.size();
  require(degree >= 1, ErrorCode::InvalidArgument, "spline order must be at least 1");
  require(y.size() == n, ErrorCode::LengthMismatch, "x and y lengths differ");
  require(n >= 1, ErrorCode::TooFewPoints, "no observations");
  require(x.allFinite() && y.allFinite() && knots.allFinite(), ErrorCode::DomainError,
          "non-finite input");
  const Scalar xmin = x.minCoeff(), xmax = x.maxCoeff();
  for (Eigen::Index k = 0; k < num_knots; ++k) {
    if (k > 0)
      require(knots(k) > knots(k - 1), ErrorCode::KnotOrderError, "knots must be strictly increasing");
    require(knots(k) > xmin && knots(k) < xmax, ErrorCode::KnotOrderError,
            "knot " + std::to_string(k) + " outside the range of x");
  }

  const Eigen::Index d = degree + 1 + num_knots;
  RegressionProblem<Scalar> p;
  p.kind = ProblemKind::PenalizedSpline;
  p.y = y;
  p.abscissae = Vec<Scalar>(x);
  p.meta.degree = degree;
  p.meta.knots = knots;
  p.design.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar power = 1;
    for (int j = 0; j <= degree; ++j, power *= x(i)) p.design(i, j) = power;
    for (Eigen::Index k = 0; k < num_knots; ++k) {
      const Scalar u = x(i) - knots(k);
      p.design(i, degree + 1 + k) = u > 0 ? std::pow(u, degree) : Scalar(0);
    }
  }
  p.penalty = Mat<Scalar>::Zero(d, d);
  p.penalty.diagonal().tail(num_knots).setOnes();
  return p;
}

/// Ridge regression with an unpenalized intercept.
template <typename DerivedX, typename DerivedY>
RegressionProblem<typename DerivedX::Scalar> build_ridge(const Eigen::MatrixBase<DerivedX>& X,
                                                         const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Index n = X.rows(), p = X.cols();
  require(y.size() == n, ErrorCode::LengthMismatch, "X rows and y length differ");
  require(n >= p + 1, ErrorCode::TooFewPoints, "ridge needs n >= p + 1");
  require(X.allFinite() && y.allFinite(), ErrorCode::DomainError, "non-finite input");

  RegressionProblem<Scalar> prob;
  prob.kind = ProblemKind::Ridge;
  prob.y = y;
  prob.design.resize(n, p + 1);
  prob.design.col(0).setOnes();
  prob.design.rightCols(p) = X;
  prob.penalty = Mat<Scalar>::Zero(p + 1, p + 1);
  prob.penalty.diagonal().tail(p).setOnes();
  return prob;
}

}  // namespace l2div
