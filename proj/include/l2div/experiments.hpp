#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "l2div/selection.hpp"

namespace l2div {

/// Simulation settings: x_i = (i - 0.5)/n, y = 1 + 3 sin(2 pi x - pi) + N(0, sigma2),
/// lambda on the grid log10(n lambda) = start(step)end.
struct GuConfig {
  std::size_t n = 100;
  std::size_t replicates = 100;
  double sigma2 = 1.0;
  double grid_start = -5.0;
  double grid_step = 0.05;
  double grid_end = -1.0;
  std::uint64_t seed = 1998;
  std::string f_true = "gu1998";
  AicForm aic_form = AicForm::Paper;

  void validate() const;
  std::vector<double> lambda_grid() const;
};

/// Flat snake_case JSON; unknown keys are rejected with ConfigError.
GuConfig gu_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GuConfig& cfg);

double gu_truth(double x);

struct GuData {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd f;
};

GuData generate_gu_data(const GuConfig& cfg, std::size_t replicate);

struct DivergenceRow {
  std::size_t replicate = 0;
  double lambda = 0;
  double rho = 0;
  double div_lambda = 0;
  double div_rho = 0;
  double div_rho_exact = 0;  // implicit-differentiation divergence at the same rho
  bool active = true;
};

enum class Method { AicLambda, AicRho, GcvLambda, GcvRho };
inline constexpr std::array<Method, 4> kMethods{Method::AicLambda, Method::AicRho, Method::GcvLambda,
                                                Method::GcvRho};
std::string_view to_string(Method m);

struct RelErrRow {
  Method method = Method::AicLambda;
  std::size_t replicate = 0;
  double relative_error = 0;
};

struct ReplicateChecks {
  bool rho_strictly_decreasing = true;
  std::size_t div_gap_violations = 0;  // div(lambda) - div(rho) outside [0, 1]
  std::size_t duality_checked = 0;
  std::size_t duality_failed = 0;
  bool loss_interior_minimum = false;
  bool flat_loss = false;
};

struct SimulationReport {
  GuConfig config;
  std::vector<DivergenceRow> divergence_rows;
  std::vector<RelErrRow> relerr_rows;
  std::vector<ReplicateChecks> checks;
  std::vector<std::string> warnings;

  nlohmann::json summary() const;
};

SimulationReport run_divergence_curves(const GuConfig& cfg, unsigned jobs = 1);
SimulationReport run_selection_comparison(const GuConfig& cfg, unsigned jobs = 1);
SimulationReport run_simulation(const GuConfig& cfg, unsigned jobs = 1);

/// Writes divergence.csv, relerr.csv and summary.json into `dir`.
void write_report(const SimulationReport& report, const std::filesystem::path& dir);

std::string divergence_csv(const SimulationReport& report);
std::string relerr_csv(const SimulationReport& report);

/// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> v, double q);

}  // namespace l2div
