#include "l2div/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "l2div/builders.hpp"
#include "l2div/dr_engine.hpp"
#include "l2div/error.hpp"
#include "l2div/fixtures.hpp"
#include "l2div/oracles.hpp"
#include "l2div/random.hpp"

namespace l2div::validation {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Check absolute(std::string suite, std::string name, double expected, double observed, double tol, bool hard = true) {
  return {std::move(suite), std::move(name), expected, observed, tol, std::abs(observed - expected) <= tol, hard};
}

Check relative(std::string suite, std::string name, double expected, double observed, double tol, bool hard = true) {
  const double scale = std::max(1.0, std::abs(expected));
  return {std::move(suite), std::move(name), expected, observed, tol,
          std::abs(observed - expected) <= tol * scale, hard};
}

std::function<VectorXd(const VectorXd&)> constraint_refit(const DRSystem<double>& sys, double rho) {
  return [&sys, rho](const VectorXd& y) { return fit_constraint(sys, y, rho).mu; };
}

std::function<VectorXd(const VectorXd&)> penalty_refit(const DRSystem<double>& sys, double lambda) {
  return [&sys, lambda](const VectorXd& y) { return fit_penalty(sys, y, lambda).mu; };
}

// Constraint radius at which the fit sits well inside the active region.
double active_rho(const DRSystem<double>& sys, const VectorXd& y, double fraction) {
  return fraction * fit_penalty(sys, y, 0.0).rho_induced;
}

std::string tag(const std::string& base, int i) { return base + "[" + std::to_string(i) + "]"; }

// Explicit hat-matrix trace in extended precision, so the oracle does not inherit the
// squared condition number of N'N at double precision.
double direct_trace(const RegressionProblem<double>& problem, double lambda) {
  RegressionProblem<long double> wide;
  wide.y = problem.y.cast<long double>();
  wide.design = problem.design.cast<long double>();
  wide.penalty = problem.penalty.cast<long double>();
  return static_cast<double>(trace_hat_direct(wide, static_cast<long double>(lambda)));
}

std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

std::vector<Check> run_trace_suite() {
  std::vector<Check> out;
  for (int i = 0; i < 20; ++i) {
    const auto problem = fixtures::random_of_kind(i, 500 + i);
    const auto sys = decompose(problem);
    const double scale = sys.c(0) > 0 ? 1.0 / sys.c(0) : 1.0;
    for (double lambda : {0.0, 0.01 * scale, scale, 100 * scale})
      out.push_back(absolute("trace", tag(std::string(to_string(problem.kind)) + " lambda=" + short_double(lambda), i),
                             direct_trace(problem, lambda), div_lambda(sys, lambda), 1e-8));
  }
  const auto ridge = fixtures::random_ridge(20, 4, 77);
  const auto sys = decompose(ridge);
  out.push_back(absolute("trace", "ridge lambda=1e12 limit d-r", double(sys.d() - sys.rank),
                         trace_hat_direct(ridge, 1e12), 1e-4));
  out.push_back(absolute("trace", "lambda=0 equals d", double(sys.d()), div_lambda(sys, 0.0), 1e-12));
  return out;
}

std::vector<Check> run_duality_suite() {
  std::vector<Check> out;
  for (int i = 0; i < 12; ++i) {
    const auto problem = fixtures::random_of_kind(i, 700 + i);
    const auto sys = decompose(problem);
    if (sys.rank == 0) continue;
    double worst_lambda = 0, worst_mu = 0;
    for (int k = 0; k < 20; ++k) {
      const double lambda = std::pow(10.0, -3.0 + 6.0 * k / 19.0) / sys.c(0);
      const auto pf = fit_penalty(sys, problem.y, lambda);
      const auto cf = fit_constraint(sys, problem.y, pf.rho_induced);
      worst_lambda = std::max(worst_lambda, std::abs(cf.lambda_star - lambda) / lambda);
      worst_mu = std::max(worst_mu, (cf.mu - pf.mu).cwiseAbs().maxCoeff());
    }
    const std::string kind(to_string(problem.kind));
    out.push_back(absolute("duality", tag(kind + " lambda recovery (max rel err)", i), 0, worst_lambda, 1e-6));
    out.push_back(absolute("duality", tag(kind + " fitted values (max abs diff)", i), 0, worst_mu, 1e-8));
  }
  return out;
}

std::vector<Check> run_fd_suite() {
  std::vector<Check> out;
  {
    const auto sph = fixtures::spherical();
    const auto sys = decompose(sph);
    const auto cf = fit_constraint(sys, sph.y, 1.0);
    out.push_back(absolute("fd", "spherical fixture: finite differences vs 2/3", 2.0 / 3.0,
                           fd_divergence<double>(constraint_refit(sys, 1.0), sph.y), 1e-4));
    out.push_back(absolute("fd", "spherical fixture: closed form vs 2/3", 2.0 / 3.0, cf.div_rho, 1e-10));
  }
  for (int i = 0; i < 8; ++i) {
    const auto problem = fixtures::random_of_kind(i, 900 + i);
    const auto sys = decompose(problem);
    const double lambda = sys.c(0) > 0 ? 0.5 / sys.c(0) : 0.5;
    out.push_back(absolute("fd", tag(std::string(to_string(problem.kind)) + " penalty fit", i),
                           div_lambda(sys, lambda), fd_divergence<double>(penalty_refit(sys, lambda), problem.y),
                           1e-6));
  }
  for (int i = 0; i < 10; ++i) {
    const Eigen::Index r = 2 + i % 5;
    const auto problem = fixtures::random_diagonal(r + 1, r, 1100 + i);
    const auto sys = decompose(problem);
    const double rho = active_rho(sys, problem.y, 0.3);
    const auto cf = fit_constraint(sys, problem.y, rho);
    const double fd = fd_divergence<double>(constraint_refit(sys, rho), problem.y);
    const std::string base = "diagonal r=" + std::to_string(r);
    out.push_back(relative("fd", tag(base + ": finite differences vs implicit differentiation", i),
                           implicit_divergence(sys, cf), fd, 1e-6));
    out.push_back(relative("fd", tag(base + ": closed-form div(rho) vs finite differences", i), fd, cf.div_rho,
                           1e-4, /*hard=*/r == 2));
  }
  return out;
}

std::vector<Check> run_mc_suite(unsigned jobs) {
  std::vector<Check> out;
  constexpr std::size_t M = 2000;
  constexpr std::uint64_t seed = 20240601;
  {
    // fixed-lambda smoothing spline on x_i = (i - 0.5)/50
    const Eigen::Index n = 50;
    VectorXd x(n), mean(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i) = (double(i) + 0.5) / double(n);
      mean(i) = 1 + 3 * std::sin(2 * M_PI * x(i) - M_PI);
    }
    const auto sys = decompose(build_smoothing_spline(x, mean));
    const double lambda = 1e-3 / double(n);
    const auto est = mc_degrees_of_freedom<double>(
        mean, 1.0, [&](std::size_t m) { return VectorXd(mean + fixtures::normal_vector(n, seed, m)); },
        penalty_refit(sys, lambda), M, jobs);
    out.push_back(absolute("mc", "smoothing spline n=50 fixed lambda (tolerance 3 SE)", div_lambda(sys, lambda),
                           est.estimate, 3 * est.std_error));
  }
  for (Eigen::Index p : {2, 5}) {
    const Eigen::Index n = 30;
    const auto base = fixtures::random_ridge(n, p, 4242 + p);
    const VectorXd beta = fixtures::normal_vector(p + 1, 4242 + p, 11);
    const VectorXd mean = base.design * beta;
    const auto sys = decompose(base);
    const double rho = 0.5 * beta.tail(p).squaredNorm();
    const auto draw = [&](std::size_t m) { return VectorXd(mean + fixtures::normal_vector(n, seed + p, m)); };
    const auto est = mc_degrees_of_freedom<double>(mean, 1.0, draw, constraint_refit(sys, rho), M, jobs);
    double mean_closed = 0, mean_exact = 0;
    for (std::size_t m = 0; m < M; ++m) {
      const auto cf = fit_constraint(sys, draw(m), rho);
      mean_closed += cf.div_rho;
      mean_exact += implicit_divergence(sys, cf);
    }
    mean_closed /= double(M);
    mean_exact /= double(M);
    const std::string label = "ridge n=30 p=" + std::to_string(p) + " fixed rho";
    out.push_back(absolute("mc", label + ": mean closed-form div(rho) (tolerance 3 SE)", mean_closed, est.estimate,
                           3 * est.std_error, /*hard=*/p == 2));
    out.push_back(absolute("mc", label + ": mean exact divergence (tolerance 3 SE)", mean_exact, est.estimate,
                           3 * est.std_error));
  }
  return out;
}

std::vector<Check> run_geometry_suite() {
  std::vector<Check> out;
  {
    const auto sph = fixtures::spherical();
    const auto sys = decompose(sph);
    const auto cf = fit_constraint(sys, sph.y, 1.0);
    const VectorXd pencil = geometric_phi(sys, cf);
    for (Eigen::Index j = 0; j < pencil.size(); ++j)
      out.push_back(relative("geometry", "spherical pencil eigenvalue " + std::to_string(j) + " vs lambda*",
                             cf.lambda_star, pencil(j), 1e-6));
  }
  for (int i = 0; i < 30; ++i) {
    const Eigen::Index r = 2 + i % 5;
    const auto problem = fixtures::random_diagonal(r + 1 + i % 2, r, 1300 + i);
    const auto sys = decompose(problem);
    const auto cf = fit_constraint(sys, problem.y, active_rho(sys, problem.y, 0.4));
    PolarChart<double> chart;
    VectorXd pencil;
    try {
      pencil = geometric_phi(sys, cf, &chart);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SingularChart) continue;
      throw;
    }
    VectorXd closed = cf.phi;
    std::sort(closed.begin(), closed.end());
    const double rel_gap = ((pencil - closed).cwiseAbs().array() / closed.cwiseAbs().array().max(1e-300)).maxCoeff();
    const std::string base = tag("r=" + std::to_string(r), i);
    out.push_back(absolute("geometry", base + ": closed-form phi vs pencil eigenvalues (max rel gap)", 0, rel_gap,
                           1e-6, /*hard=*/r == 2));

    const double pencil_div = double(sys.d() - sys.rank) + (1.0 / (1.0 + pencil.array())).sum();
    out.push_back(relative("geometry", base + ": pencil divergence vs implicit differentiation",
                           implicit_divergence(sys, cf), pencil_div, 1e-8));
    out.push_back({"geometry", base + ": smallest pencil eigenvalue >= -1e-8", 0, pencil.minCoeff(), 1e-8,
                   pencil.minCoeff() >= -1e-8, true});
    const VectorXd rebuilt = chart_point<double>(sys.c.head(r), cf.rho, chart.theta);
    out.push_back(absolute("geometry", base + ": chart reconstruction", 0,
                           (rebuilt - cf.gamma.head(r)).cwiseAbs().maxCoeff(), 1e-8));
    const VectorXd tangent_dot = chart.L.transpose() * sys.c.head(r).cwiseSqrt().cwiseInverse().cwiseProduct(chart.nu);
    out.push_back(absolute("geometry", base + ": normal orthogonal to tangents", 0,
                           tangent_dot.cwiseAbs().maxCoeff(), 1e-8));
  }
  return out;
}

std::vector<Check> run_suite(const std::string& suite, unsigned jobs) {
  std::vector<Check> out;
  const auto append = [&](std::vector<Check> v) { out.insert(out.end(), v.begin(), v.end()); };
  const bool all = suite == "all";
  require(all || suite == "fd" || suite == "mc" || suite == "trace" || suite == "geometry" || suite == "duality",
          ErrorCode::InvalidArgument, "unknown suite '" + suite + "'");
  if (all || suite == "trace") append(run_trace_suite());
  if (all || suite == "duality") append(run_duality_suite());
  if (all || suite == "fd") append(run_fd_suite());
  if (all || suite == "geometry") append(run_geometry_suite());
  if (all || suite == "mc") append(run_mc_suite(jobs));
  return out;
}

nlohmann::json to_json(const std::vector<Check>& checks) {
  nlohmann::json records = nlohmann::json::array();
  std::size_t hard_fail = 0, findings = 0;
  for (const auto& c : checks) {
    records.push_back({{"suite", c.suite},
                       {"check", c.name},
                       {"expected", c.expected},
                       {"observed", c.observed},
                       {"tolerance", c.tolerance},
                       {"pass", c.pass},
                       {"severity", c.hard ? "hard" : "soft"}});
    if (c.hard && !c.pass) ++hard_fail;
    if (!c.hard && !c.pass) ++findings;
  }
  return {{"checks", records},
          {"total", checks.size()},
          {"hard_failures", hard_fail},
          {"findings", findings},
          {"pass", hard_fail == 0}};
}

bool all_hard_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.hard || c.pass; });
}

}  // namespace l2div::validation
