#pragma once

#include <algorithm>
#include <array>

#include <Eigen/Dense>

#include "l2div/problem.hpp"

namespace l2div {

/// Cubic B-spline basis on a clamped knot vector built from strictly increasing breakpoints.
///
/// With breakpoints x_1 < ... < x_n the knot vector is x_1 (x4), x_2 .. x_{n-1}, x_n (x4),
/// giving n + 2 basis functions on [x_1, x_n].
template <typename Scalar>
class CubicBSplineBasis {
 public:
  static constexpr int kOrder = 4;

  explicit CubicBSplineBasis(const Vec<Scalar>& breakpoints) : breaks_(breakpoints) {
    const Eigen::Index n = breaks_.size();
    knots_.resize(n + 6);
    for (int i = 0; i < 3; ++i) {
      knots_(i) = breaks_(0);
      knots_(n + 3 + i) = breaks_(n - 1);
    }
    knots_.segment(3, n) = breaks_;
  }

  Eigen::Index size() const { return breaks_.size() + 2; }
  const Vec<Scalar>& knots() const { return knots_; }
  const Vec<Scalar>& breakpoints() const { return breaks_; }

  /// Index of the first nonzero basis function at x, i.e. span - 3.
  Eigen::Index span(Scalar x) const {
    const Eigen::Index n = breaks_.size();
    if (x >= breaks_(n - 1)) return n + 1;  // last nondegenerate span
    if (x <= breaks_(0)) return 3;
    const auto* begin = breaks_.data();
    const auto* it = std::upper_bound(begin, begin + n, x);
    return static_cast<Eigen::Index>(it - begin) - 1 + 3;
  }

  /// Values (row 0) and derivatives up to `nder` of the 4 nonzero basis functions at x.
  /// Returns the index of the first of those functions.
  Eigen::Index evaluate(Scalar x, int nder, Eigen::Matrix<Scalar, 4, 4>& ders) const {
    const Eigen::Index s = span(x);
    const auto& t = knots_;
    constexpr int p = 3;
    Eigen::Matrix<Scalar, 4, 4> ndu;
    std::array<Scalar, 4> left{}, right{};
    ndu(0, 0) = 1;
    for (int j = 1; j <= p; ++j) {
      left[j] = x - t(s + 1 - j);
      right[j] = t(s + j) - x;
      Scalar saved = 0;
      for (int r = 0; r < j; ++r) {
        ndu(j, r) = right[r + 1] + left[j - r];
        const Scalar temp = ndu(r, j - 1) / ndu(j, r);
        ndu(r, j) = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      ndu(j, j) = saved;
    }
    ders.setZero();
    for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

    Eigen::Matrix<Scalar, 2, 4> a;
    for (int r = 0; r <= p; ++r) {
      int s1 = 0, s2 = 1;
      a(0, 0) = 1;
      for (int k = 1; k <= nder; ++k) {
        Scalar d = 0;
        const int rk = r - k, pk = p - k;
        if (r >= k) {
          a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
          d = a(s2, 0) * ndu(rk, pk);
        }
        const int j1 = rk >= -1 ? 1 : -rk;
        const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
        for (int j = j1; j <= j2; ++j) {
          a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
          d += a(s2, j) * ndu(rk + j, pk);
        }
        if (r <= pk) {
          a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
          d += a(s2, k) * ndu(r, pk);
        }
        ders(k, r) = d;
        std::swap(s1, s2);
      }
    }
    Scalar factor = p;
    for (int k = 1; k <= nder; ++k) {
      ders.row(k) *= factor;
      factor *= (p - k);
    }
    return s - p;
  }

  /// Row vector of all n + 2 basis functions (or a derivative) at x.
  Vec<Scalar> row(Scalar x, int derivative = 0) const {
    Eigen::Matrix<Scalar, 4, 4> ders;
    const Eigen::Index first = evaluate(x, derivative, ders);
    Vec<Scalar> out = Vec<Scalar>::Zero(size());
    out.segment(first, 4) = ders.row(derivative).transpose();
    return out;
  }

  /// Coefficients reproducing the identity function t.
  Vec<Scalar> greville() const {
    Vec<Scalar> g(size());
    for (Eigen::Index i = 0; i < size(); ++i)
      g(i) = (knots_(i + 1) + knots_(i + 2) + knots_(i + 3)) / Scalar(3);
    return g;
  }

  /// Gram matrix of second derivatives, integrated with `points_per_interval`-point
  /// Gauss-Legendre after splitting every knot interval into `refine` pieces.
  /// The integrand is piecewise quadratic so refine = 1 with 2 points is exact.
  Mat<Scalar> second_derivative_gram(int refine = 1) const {
    const Eigen::Index m = size();
    Mat<Scalar> gram = Mat<Scalar>::Zero(m, m);
    const Scalar g = Scalar(1) / std::sqrt(Scalar(3));
    Eigen::Matrix<Scalar, 4, 4> ders;
    for (Eigen::Index k = 0; k + 1 < breaks_.size(); ++k) {
      const Scalar lo = breaks_(k), hi = breaks_(k + 1);
      const Scalar width = (hi - lo) / refine;
      for (int piece = 0; piece < refine; ++piece) {
        const Scalar a = lo + piece * width;
        const Scalar mid = a + width / 2, half = width / 2;
        for (Scalar node : {mid - half * g, mid + half * g}) {
          const Eigen::Index first = evaluate(node, 2, ders);
          const Eigen::Matrix<Scalar, 4, 1> d2 = ders.row(2).transpose();
          gram.block(first, first, 4, 4) += half * d2 * d2.transpose();
        }
      }
    }
    return gram;
  }

 private:
  Vec<Scalar> breaks_;
  Vec<Scalar> knots_;
};

/// Basis change from the n + 2 cubic B-splines to the n-dimensional natural cubic
/// spline space (zero second derivative at both end breakpoints). Columns are
/// orthonormal; the first two span the constant and linear functions.
template <typename Scalar>
Mat<Scalar> natural_spline_transform(const CubicBSplineBasis<Scalar>& basis) {
  const Eigen::Index m = basis.size();
  const auto& br = basis.breakpoints();

  Mat<Scalar> constraints(2, m);
  constraints.row(0) = basis.row(br(0), 2).transpose();
  constraints.row(1) = basis.row(br(br.size() - 1), 2).transpose();

  Eigen::HouseholderQR<Mat<Scalar>> cqr(constraints.transpose());
  const Mat<Scalar> full_q = cqr.householderQ() * Mat<Scalar>::Identity(m, m);
  const Mat<Scalar> null_space = full_q.rightCols(m - 2);

  Mat<Scalar> linear(m, 2);
  linear.col(0).setOnes();
  linear.col(1) = basis.greville();
  Eigen::HouseholderQR<Mat<Scalar>> lqr(linear);
  const Mat<Scalar> lin_q = lqr.householderQ() * Mat<Scalar>::Identity(m, 2);

  const Mat<Scalar> rest = null_space - lin_q * (lin_q.transpose() * null_space);
  Eigen::ColPivHouseholderQR<Mat<Scalar>> rqr(rest);
  const Mat<Scalar> rest_q = rqr.householderQ() * Mat<Scalar>::Identity(m, m - 4);

  Mat<Scalar> transform(m, m - 2);
  transform.leftCols(2) = lin_q;
  transform.rightCols(m - 4) = rest_q;
  return transform;
}

}  // namespace l2div
