#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "l2div/fixtures.hpp"
#include "l2div/oracles.hpp"
#include "l2div/random.hpp"

using namespace l2div;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::function<VectorXd(const VectorXd&)> constraint_refit(const DRSystem<double>& sys, double rho) {
  return [&sys, rho](const VectorXd& y) { return fit_constraint(sys, y, rho).mu; };
}

double pencil_divergence(const DRSystem<double>& sys, const VectorXd& phi) {
  return double(sys.d() - sys.rank) + (1.0 / (1.0 + phi.array())).sum();
}

}  // namespace

TEST_CASE("fd_divergence: linear smoothers") {
  const MatrixXd S = MatrixXd::Random(7, 7);
  const VectorXd y = fixtures::normal_vector(7, 1, 0);
  const auto linear = [&S](const VectorXd& v) -> VectorXd { return S * v; };
  CHECK(std::abs(fd_divergence<double>(linear, y) - S.trace()) <= 1e-6);

  const auto ridge = fixtures::random_ridge(10, 3, 31);
  const auto sys = decompose(ridge);
  const auto refit = [&sys](const VectorXd& v) -> VectorXd { return fit_penalty(sys, v, 0.5).mu; };
  CHECK(std::abs(fd_divergence<double>(refit, ridge.y) - div_lambda(sys, 0.5)) <= 1e-6);
}

TEST_CASE("fd_divergence: spherical constraint") {
  const auto p = fixtures::spherical();
  const auto sys = decompose(p);
  CHECK(std::abs(fd_divergence<double>(constraint_refit(sys, 1.0), p.y) - 2.0 / 3.0) <= 1e-4);
  CHECK(implicit_divergence(sys, fit_constraint(sys, p.y, 1.0)) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("implicit divergence agrees with finite differences for r = 2..6") {
  for (Eigen::Index r = 2; r <= 6; ++r) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto p = fixtures::random_diagonal(r + 2, r, 40 + 10 * r + seed);
      const auto sys = decompose(p);
      const auto fit = fit_constraint(sys, p.y, 1.0);
      REQUIRE(fit.active);
      const double fd = fd_divergence<double>(constraint_refit(sys, 1.0), p.y);
      const double exact = implicit_divergence(sys, fit);
      CHECK(std::abs(fd - exact) <= 1e-6 * std::max(1.0, exact));
      if (r == 2) CHECK(std::abs(fit.div_rho - exact) <= 1e-6 * exact);
    }
  }
}

TEST_CASE("mc_degrees_of_freedom: linear smoother, determinism, doubling") {
  const auto p = fixtures::random_pspline(30, 2, 6, 8);
  const auto sys = decompose(p);
  const double lambda = 0.01;
  const VectorXd mean = fit_penalty(sys, p.y, 0.0).mu;
  const double sigma2 = 0.25;
  const auto draw = [&](std::size_t m) -> VectorXd {
    auto engine = make_stream(99, m);
    std::normal_distribution<double> z(0.0, std::sqrt(sigma2));
    VectorXd y = mean;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += z(engine);
    return y;
  };
  const auto fitter = [&](const VectorXd& y) -> VectorXd { return fit_penalty(sys, y, lambda).mu; };

  const auto serial = mc_degrees_of_freedom<double>(mean, sigma2, draw, fitter, 1000, 1);
  const auto threaded = mc_degrees_of_freedom<double>(mean, sigma2, draw, fitter, 1000, 3);
  CHECK(serial.estimate == threaded.estimate);
  CHECK(serial.std_error == threaded.std_error);
  CHECK(serial.std_error > 0);
  CHECK(std::abs(serial.estimate - div_lambda(sys, lambda)) <= 3 * serial.std_error);

  const auto doubled = mc_degrees_of_freedom<double>(mean, sigma2, draw, fitter, 2000, 1);
  CHECK(std::abs(doubled.estimate - serial.estimate) <= 2 * serial.std_error);

  CHECK_THROWS_AS(mc_degrees_of_freedom<double>(mean, sigma2, draw, fitter, 50, 1), Error);
}

TEST_CASE("trace_hat_direct: size guard and singular system") {
  RegressionProblem<double> big;
  big.design = MatrixXd::Identity(201, 201);
  big.penalty = MatrixXd::Zero(201, 201);
  big.y = VectorXd::Zero(201);
  CHECK_THROWS_AS(trace_hat_direct(big, 1.0), Error);

  RegressionProblem<double> singular;
  singular.design = MatrixXd::Zero(3, 2);
  singular.design.col(0).setOnes();
  singular.penalty = MatrixXd::Zero(2, 2);
  singular.y = VectorXd::Zero(3);
  try {
    trace_hat_direct(singular, 1.0);
    FAIL("expected SingularSystem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularSystem);
  }
}

TEST_CASE("geometric_phi: spherical case and scalar pencil") {
  const auto p = fixtures::spherical();
  const auto sys = decompose(p);
  const auto fit = fit_constraint(sys, p.y, 1.0);
  const VectorXd phi = geometric_phi(sys, fit);
  CHECK(testing::max_abs(phi - VectorXd::Constant(2, 2.0)) <= 1e-8);

  const auto q = fixtures::random_diagonal(4, 2, 5);
  const auto qsys = decompose(q);
  const auto qfit = fit_constraint(qsys, q.y, 1.0);
  PolarChart<double> chart;
  const VectorXd qphi = geometric_phi(qsys, qfit, &chart);
  REQUIRE(qphi.size() == 1);
  CHECK(qphi(0) == doctest::Approx(chart.H11(0, 0) / chart.G11(0, 0)).epsilon(1e-12));
  CHECK(qphi(0) == doctest::Approx(qfit.phi(0)).epsilon(1e-6));
}

TEST_CASE("geometric_phi: chart, normal, PSD pencil and divergence for r = 3..6") {
  for (Eigen::Index r = 3; r <= 6; ++r) {
    const auto p = fixtures::random_diagonal(r + 1, r, 500 + r);
    const auto sys = decompose(p);
    const auto fit = fit_constraint(sys, p.y, 1.0);
    PolarChart<double> chart;
    const VectorXd phi = geometric_phi(sys, fit, &chart);
    CHECK(phi.minCoeff() >= -1e-8);

    const VectorXd c = sys.c.head(r);
    const VectorXd back = chart_point(c, chart.rho, chart.theta);
    CHECK(testing::max_abs(back - fit.gamma.head(r)) <= 1e-8);

    const VectorXd normal = c.cwiseProduct(fit.gamma.head(r));
    const MatrixXd tangents = c.cwiseSqrt().cwiseInverse().asDiagonal() * chart.L;
    CHECK(testing::max_abs(normal.transpose() * tangents) <= 1e-10 * normal.norm() * tangents.norm());

    CHECK(std::abs(pencil_divergence(sys, phi) - implicit_divergence(sys, fit)) <= 1e-8);
  }
}

TEST_CASE("geometric_phi: second fundamental form by finite differences") {
  const Eigen::Index r = 4;
  const auto p = fixtures::random_diagonal(r, r, 77);
  const auto sys = decompose(p);
  const auto fit = fit_constraint(sys, p.y, 1.0);
  PolarChart<double> chart;
  geometric_phi(sys, fit, &chart);
  const VectorXd c = sys.c.head(r);
  const VectorXd g0 = chart_point(c, chart.rho, chart.theta);
  const VectorXd unit_normal = c.cwiseProduct(g0).normalized();
  const double h = 1e-4;
  const auto at = [&](Eigen::Index j, double dj, Eigen::Index k, double dk) {
    VectorXd t = chart.theta;
    t(j) += dj;
    t(k) += dk;
    return chart_point(c, chart.rho, t);
  };
  MatrixXd first(r - 1, r - 1), second(r - 1, r - 1);
  for (Eigen::Index j = 0; j < r - 1; ++j) {
    for (Eigen::Index k = 0; k < r - 1; ++k) {
      const VectorXd dj = (at(j, h, j, 0) - at(j, -h, j, 0)) / (2 * h);
      const VectorXd dk = (at(k, h, k, 0) - at(k, -h, k, 0)) / (2 * h);
      first(j, k) = dj.dot(dk);
      const VectorXd djk = (at(j, h, k, h) - at(j, h, k, -h) - at(j, -h, k, h) + at(j, -h, k, -h)) / (4 * h * h);
      second(j, k) = -unit_normal.dot(djk);
    }
  }
  CHECK(testing::max_abs(first - chart.G11) <= 1e-6 * testing::max_abs(chart.G11));
  CHECK(testing::max_abs(fit.tau * second - chart.H11) <= 1e-5 * testing::max_abs(chart.H11));
}

TEST_CASE("geometric_phi: singular chart and inactive fit") {
  RegressionProblem<double> p;
  p.design = MatrixXd::Identity(3, 3);
  p.penalty = Eigen::Vector3d(3, 2, 1).asDiagonal();
  p.y = Eigen::Vector3d(2, 0, 0);
  const auto sys = decompose(p);
  const auto fit = fit_constraint(sys, p.y, 1.0);
  try {
    geometric_phi(sys, fit);
    FAIL("expected SingularChart");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularChart);
  }
  const auto inactive = fit_constraint(sys, p.y, 1e6);
  CHECK_THROWS_AS(geometric_phi(sys, inactive), Error);
}
