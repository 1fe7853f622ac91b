#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "l2div/functional.hpp"
#include "l2div/problem.hpp"

/// Deterministic problem instances shared by the `validate` command and the test suites.
namespace l2div::fixtures {

/// n = d = r = 3, identity design, identity penalty, y = (2, 1, 2). At rho = 1 the
/// constraint is active with lambda* = 2 and divergence 2/3.
RegressionProblem<double> spherical();

/// Ridge instance with an intercept and three orthonormal centered predictors
/// (Hadamard columns, n = 4), so c = (1, 1, 1, 0) and Z'y on the penalized block is (2, 1, 2).
Eigen::MatrixXd spherical_ridge_x();
Eigen::VectorXd spherical_ridge_y();

RegressionProblem<double> random_ridge(Eigen::Index n, Eigen::Index p, std::uint64_t seed);
RegressionProblem<double> random_pspline(Eigen::Index n, int degree, Eigen::Index knots, std::uint64_t seed);
RegressionProblem<double> random_smoothing(Eigen::Index n, std::uint64_t seed);
RegressionProblem<double> random_functional(Eigen::Index n, Eigen::Index m, std::uint64_t seed,
                                            FunctionalDesign<double>* design = nullptr);

/// Rough random curves (Fourier series with slowly decaying coefficients) on a uniform grid.
Eigen::MatrixXd random_curves(Eigen::Index n, const Eigen::VectorXd& grid, std::uint64_t seed);

/// Identity design (n = d) with penalty diag(c_1..c_r, 0..), distinct random c in [0.5, 4].
/// y is scaled so the unconstrained roughness is well above 1.
RegressionProblem<double> random_diagonal(Eigen::Index d, Eigen::Index r, std::uint64_t seed);

/// Problem of the given kind index (0 smoothing, 1 pspline, 2 ridge, 3 functional) with d <= 12.
RegressionProblem<double> random_of_kind(int kind, std::uint64_t seed);

Eigen::VectorXd normal_vector(Eigen::Index n, std::uint64_t seed, std::uint64_t stream);

}  // namespace l2div::fixtures
