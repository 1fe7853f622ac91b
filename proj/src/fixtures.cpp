#include "l2div/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "l2div/builders.hpp"
#include "l2div/random.hpp"

namespace l2div::fixtures {

Eigen::VectorXd normal_vector(Eigen::Index n, std::uint64_t seed, std::uint64_t stream) {
  auto engine = make_stream(seed, stream);
  std::normal_distribution<double> z;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = z(engine);
  return v;
}

RegressionProblem<double> spherical() {
  RegressionProblem<double> p;
  p.kind = ProblemKind::Ridge;
  p.design = Eigen::MatrixXd::Identity(3, 3);
  p.penalty = Eigen::MatrixXd::Identity(3, 3);
  p.y = Eigen::Vector3d(2, 1, 2);
  return p;
}

Eigen::MatrixXd spherical_ridge_x() {
  Eigen::MatrixXd X(4, 3);
  X << 1, 1, 1,  //
      1, -1, -1,  //
      -1, 1, -1,  //
      -1, -1, 1;
  return X / 2.0;
}

Eigen::VectorXd spherical_ridge_y() {
  const Eigen::MatrixXd X = spherical_ridge_x();
  return X * Eigen::Vector3d(2, 1, 2) + Eigen::VectorXd::Constant(4, 0.5);
}

RegressionProblem<double> random_ridge(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index j = 0; j < p; ++j) X.col(j) = normal_vector(n, seed, 100 + j);
  Eigen::VectorXd beta = normal_vector(p, seed, 1);
  Eigen::VectorXd y = X * beta + 0.5 * normal_vector(n, seed, 2);
  return build_ridge(X, y);
}

RegressionProblem<double> random_pspline(Eigen::Index n, int degree, Eigen::Index knots, std::uint64_t seed) {
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = (double(i) + 0.5) / double(n);
  Eigen::VectorXd kappa(knots);
  for (Eigen::Index k = 0; k < knots; ++k) kappa(k) = double(k + 1) / double(knots + 1);
  Eigen::VectorXd y = (2 * std::numbers::pi * x.array()).sin().matrix() + 0.3 * normal_vector(n, seed, 3);
  return build_penalized_spline(x, y, degree, kappa);
}

RegressionProblem<double> random_smoothing(Eigen::Index n, std::uint64_t seed) {
  auto engine = make_stream(seed, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (auto& v : xs) v = u(engine);
  std::sort(xs.begin(), xs.end());
  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(xs.data(), n);
  Eigen::VectorXd y = (3 * x.array()).cos().matrix() + 0.2 * normal_vector(n, seed, 5);
  return build_smoothing_spline(x, y);
}

Eigen::MatrixXd random_curves(Eigen::Index n, const Eigen::VectorXd& grid, std::uint64_t seed) {
  constexpr int kTerms = 40;
  Eigen::MatrixXd curves = Eigen::MatrixXd::Zero(n, grid.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd a = normal_vector(2 * kTerms + 1, seed, 1000 + i);
    curves.row(i).setConstant(a(0));
    for (int k = 1; k <= kTerms; ++k) {
      const double scale = 1.0 / std::sqrt(double(k));
      const Eigen::ArrayXd arg = 2 * std::numbers::pi * k * grid.array();
      curves.row(i) += scale * (a(2 * k - 1) * arg.sin() + a(2 * k) * arg.cos()).matrix().transpose();
    }
  }
  return curves;
}

RegressionProblem<double> random_functional(Eigen::Index n, Eigen::Index m, std::uint64_t seed,
                                            FunctionalDesign<double>* design) {
  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(m, 0.0, 1.0);
  const Eigen::MatrixXd curves = random_curves(n, grid, seed);
  const Eigen::VectorXd slope = (std::numbers::pi * grid.array()).sin();
  Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / double(m - 1));
  w(0) = w(m - 1) = 0.5 / double(m - 1);
  Eigen::VectorXd y = curves * w.cwiseProduct(slope);
  y += 0.1 * normal_vector(n, seed, 6);
  auto [problem, fd] = build_functional(curves, grid, y);
  if (design) *design = std::move(fd);
  return problem;
}

RegressionProblem<double> random_diagonal(Eigen::Index d, Eigen::Index r, std::uint64_t seed) {
  auto engine = make_stream(seed, 7);
  std::uniform_real_distribution<double> u(0.5, 4.0);
  RegressionProblem<double> p;
  p.kind = ProblemKind::Ridge;
  p.design = Eigen::MatrixXd::Identity(d, d);
  p.penalty = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 0; j < r; ++j) p.penalty(j, j) = u(engine);
  p.y = normal_vector(d, seed, 8);
  const double roughness = (p.penalty.diagonal().array() * p.y.array().square()).sum();
  p.y *= std::sqrt(4.0 / roughness);
  return p;
}

RegressionProblem<double> random_of_kind(int kind, std::uint64_t seed) {
  auto engine = make_stream(seed, 9);
  switch (kind % 4) {
    case 0: {
      std::uniform_int_distribution<Eigen::Index> n(4, 12);
      return random_smoothing(n(engine), seed);
    }
    case 1: {
      std::uniform_int_distribution<int> p(1, 3);
      std::uniform_int_distribution<Eigen::Index> k(1, 6);
      std::uniform_int_distribution<Eigen::Index> n(20, 30);
      return random_pspline(n(engine), p(engine), k(engine), seed);
    }
    case 2: {
      std::uniform_int_distribution<Eigen::Index> p(1, 11);
      std::uniform_int_distribution<Eigen::Index> n(15, 30);
      return random_ridge(n(engine), p(engine), seed);
    }
    default: {
      std::uniform_int_distribution<Eigen::Index> n(6, 12);
      return random_functional(n(engine), 101, seed);
    }
  }
}

}  // namespace l2div::fixtures
