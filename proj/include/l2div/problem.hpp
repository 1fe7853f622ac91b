#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "l2div/error.hpp"

namespace l2div {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class ProblemKind { SmoothingSpline, PenalizedSpline, Ridge, FunctionalLinear };

constexpr std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::SmoothingSpline: return "smoothing";
    case ProblemKind::PenalizedSpline: return "pspline";
    case ProblemKind::Ridge: return "ridge";
    case ProblemKind::FunctionalLinear: return "functional";
  }
  return "unknown";
}

/// Builder parameters kept alongside the assembled matrices.
template <typename Scalar>
struct ProblemMeta {
  int degree = 0;                 // penalized spline order p
  Vec<Scalar> knots;              // penalized spline knots
  Vec<Scalar> quadrature_grid;    // functional problems
  std::string kernel;             // functional problems
};

/// Least squares problem ||y - N beta||^2 with quadratic roughness beta' Omega beta.
template <typename Scalar>
struct RegressionProblem {
  Vec<Scalar> y;
  Mat<Scalar> design;   // n x d
  Mat<Scalar> penalty;  // d x d, symmetric PSD
  ProblemKind kind = ProblemKind::Ridge;
  std::optional<Vec<Scalar>> abscissae;
  ProblemMeta<Scalar> meta;

  Eigen::Index n() const { return design.rows(); }
  Eigen::Index d() const { return design.cols(); }
};

/// Replaces A by (A + A')/2.
template <typename Derived>
void symmetrize(Eigen::MatrixBase<Derived>& a) {
  a = (0.5 * (a + a.transpose())).eval();
}

/// Checks the shape and penalty invariants shared by every problem kind.
template <typename Scalar>
void validate_problem(const RegressionProblem<Scalar>& p) {
  require(p.design.cols() >= 1, ErrorCode::DimensionMismatch, "design needs at least one column");
  require(p.design.rows() == p.y.size(), ErrorCode::DimensionMismatch,
          "design rows must match the response length");
  require(p.penalty.rows() == p.design.cols() && p.penalty.cols() == p.design.cols(),
          ErrorCode::DimensionMismatch, "penalty must be d x d");
  require(p.y.allFinite() && p.design.allFinite() && p.penalty.allFinite(),
          ErrorCode::DomainError, "non-finite entries");
  const Scalar scale = std::max(Scalar(1), p.penalty.cwiseAbs().maxCoeff());
  require((p.penalty - p.penalty.transpose()).cwiseAbs().maxCoeff() <= Scalar(1e-12) * scale,
          ErrorCode::NonPSDPenalty, "penalty is not symmetric");
}

}  // namespace l2div
