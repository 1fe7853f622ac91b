#include "l2div/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "l2div/builders.hpp"
#include "l2div/dr_engine.hpp"
#include "l2div/io.hpp"
#include "l2div/oracles.hpp"
#include "l2div/parallel.hpp"
#include "l2div/random.hpp"

namespace l2div {

using nlohmann::json;

namespace {

// Stream offset for the duality spot-check row selection, disjoint from noise streams.
constexpr std::uint64_t kSpotCheckStream = 0x5370'6f74'0000'0000ull;
constexpr double kSpotCheckFraction = 0.05;
constexpr double kDualityTolerance = 1e-6;
constexpr double kGapSlack = 1e-6;

enum Parts : unsigned { kDivergence = 1, kSelection = 2 };

struct ReplicateResult {
  std::vector<DivergenceRow> rows;
  std::vector<RelErrRow> relerr;
  ReplicateChecks checks;
  std::vector<std::string> warnings;
};

ReplicateResult simulate_replicate(const GuConfig& cfg, const DRSystem<double>& sys,
                                   const std::vector<double>& lambdas, std::size_t rep, unsigned parts) {
  ReplicateResult out;
  const GuData data = generate_gu_data(cfg, rep);
  const auto table = evaluate_grid(sys, data.y, lambdas, Indexing::Lambda, cfg.aic_form);
  const std::size_t K = lambdas.size();

  for (std::size_t k = 1; k < K; ++k)
    if (!(table.counterpart[k] < table.counterpart[k - 1])) out.checks.rho_strictly_decreasing = false;

  if (parts & kDivergence) {
    auto picker = make_stream(cfg.seed, kSpotCheckStream + rep);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t k = 0; k < K; ++k) {
      DivergenceRow row;
      row.replicate = rep;
      row.lambda = lambdas[k];
      row.rho = table.counterpart[k];
      row.div_lambda = table.div[k];
      const auto cf = fit_constraint(sys, data.y, row.rho);
      row.active = cf.active;
      row.div_rho = cf.div_rho;
      row.div_rho_exact = implicit_divergence(sys, cf);
      for (const auto& w : cf.warnings)
        out.warnings.push_back("replicate " + std::to_string(rep) + ", lambda " + io::format_double(row.lambda) +
                               ": " + w);
      const double gap = row.div_lambda - row.div_rho;
      if (gap < -kGapSlack || gap > 1 + kGapSlack) ++out.checks.div_gap_violations;
      if (unit(picker) < kSpotCheckFraction) {
        ++out.checks.duality_checked;
        if (!cf.active || std::abs(cf.lambda_star - row.lambda) > kDualityTolerance * row.lambda)
          ++out.checks.duality_failed;
      }
      out.rows.push_back(row);
    }
  }

  if (parts & kSelection) {
    const auto curve = loss_curve(table.counterpart, table.mu, data.f);
    const auto argmin_loss = static_cast<std::size_t>(
        std::min_element(curve.loss.begin(), curve.loss.end()) - curve.loss.begin());
    out.checks.loss_interior_minimum = argmin_loss > 0 && argmin_loss + 1 < K;

    std::vector<double> rho_grid(table.counterpart.rbegin(), table.counterpart.rend());
    const auto rho_table = evaluate_grid(sys, data.y, rho_grid, Indexing::Rho, cfg.aic_form);
    const auto loss_of = [&](const Eigen::VectorXd& mu) { return (mu - data.f).squaredNorm() / double(cfg.n); };

    if (!(curve.max_loss > curve.min_loss)) {
      out.checks.flat_loss = true;
      out.warnings.push_back("replicate " + std::to_string(rep) + ": flat loss curve, skipped");
    } else {
      for (Method m : kMethods) {
        double loss = 0;
        switch (m) {
          case Method::AicLambda: loss = curve.loss[table.chosen_aic]; break;
          case Method::GcvLambda: loss = curve.loss[table.chosen_gcv]; break;
          case Method::AicRho: loss = loss_of(rho_table.mu[rho_table.chosen_aic]); break;
          case Method::GcvRho: loss = loss_of(rho_table.mu[rho_table.chosen_gcv]); break;
        }
        out.relerr.push_back({m, rep, relative_error(loss, curve)});
      }
    }
  }
  return out;
}

SimulationReport run_parts(const GuConfig& cfg, unsigned jobs, unsigned parts) {
  cfg.validate();
  const auto lambdas = cfg.lambda_grid();
  GuData design = generate_gu_data(cfg, 0);
  const auto problem = build_smoothing_spline(design.x, design.f);
  const auto sys = decompose(problem);

  std::vector<ReplicateResult> results(cfg.replicates);
  parallel_for(cfg.replicates, jobs,
               [&](std::size_t rep) { results[rep] = simulate_replicate(cfg, sys, lambdas, rep, parts); });

  SimulationReport report;
  report.config = cfg;
  for (auto& r : results) {
    report.divergence_rows.insert(report.divergence_rows.end(), r.rows.begin(), r.rows.end());
    report.relerr_rows.insert(report.relerr_rows.end(), r.relerr.begin(), r.relerr.end());
    report.checks.push_back(r.checks);
    report.warnings.insert(report.warnings.end(), r.warnings.begin(), r.warnings.end());
  }
  return report;
}

json quartiles(const std::vector<double>& v) {
  if (v.empty()) return json(nullptr);
  double mean = 0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  return {{"count", v.size()},         {"min", quantile(v, 0)},    {"q1", quantile(v, 0.25)},
          {"median", quantile(v, 0.5)}, {"q3", quantile(v, 0.75)}, {"max", quantile(v, 1)},
          {"mean", mean}};
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::AicLambda: return "AIC_lambda";
    case Method::AicRho: return "AIC_rho";
    case Method::GcvLambda: return "GCV_lambda";
    case Method::GcvRho: return "GCV_rho";
  }
  return "unknown";
}

void GuConfig::validate() const {
  require(n >= 4, ErrorCode::ConfigError, "n must be at least 4");
  require(replicates >= 1, ErrorCode::ConfigError, "replicates must be at least 1");
  require(sigma2 >= 0 && std::isfinite(sigma2), ErrorCode::ConfigError, "sigma2 must be >= 0");
  require(grid_step > 0, ErrorCode::ConfigError, "grid step must be positive");
  require(grid_start < grid_end, ErrorCode::ConfigError, "grid start must precede grid end");
  require(f_true == "gu1998", ErrorCode::ConfigError, "unknown f_true '" + f_true + "'");
}

std::vector<double> GuConfig::lambda_grid() const {
  const auto count = static_cast<std::size_t>(std::llround((grid_end - grid_start) / grid_step)) + 1;
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k)
    grid[k] = std::pow(10.0, grid_start + double(k) * grid_step) / double(n);
  return grid;
}

GuConfig gu_config_from_json(const json& j) {
  require(j.is_object(), ErrorCode::ConfigError, "config must be a JSON object");
  GuConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "n") cfg.n = value.get<std::size_t>();
      else if (key == "replicates") cfg.replicates = value.get<std::size_t>();
      else if (key == "sigma2") cfg.sigma2 = value.get<double>();
      else if (key == "grid_log10_nlambda_start") cfg.grid_start = value.get<double>();
      else if (key == "grid_log10_nlambda_step") cfg.grid_step = value.get<double>();
      else if (key == "grid_log10_nlambda_end") cfg.grid_end = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "f_true") cfg.f_true = value.get<std::string>();
      else throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, "bad value for '" + key + "': " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

json to_json(const GuConfig& cfg) {
  return {{"n", cfg.n},
          {"replicates", cfg.replicates},
          {"sigma2", cfg.sigma2},
          {"grid_log10_nlambda_start", cfg.grid_start},
          {"grid_log10_nlambda_step", cfg.grid_step},
          {"grid_log10_nlambda_end", cfg.grid_end},
          {"seed", cfg.seed},
          {"f_true", cfg.f_true}};
}

double gu_truth(double x) { return 1.0 + 3.0 * std::sin(2.0 * std::numbers::pi * x - std::numbers::pi); }

GuData generate_gu_data(const GuConfig& cfg, std::size_t replicate) {
  require(replicate < cfg.replicates, ErrorCode::InvalidArgument, "replicate index out of range");
  const auto n = static_cast<Eigen::Index>(cfg.n);
  GuData d;
  d.x.resize(n);
  d.f.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.x(i) = (double(i) + 0.5) / double(n);
    d.f(i) = gu_truth(d.x(i));
  }
  d.y = d.f;
  if (cfg.sigma2 > 0) {
    auto engine = make_stream(cfg.seed, replicate);
    std::normal_distribution<double> noise(0.0, std::sqrt(cfg.sigma2));
    for (Eigen::Index i = 0; i < n; ++i) d.y(i) += noise(engine);
  }
  return d;
}

SimulationReport run_divergence_curves(const GuConfig& cfg, unsigned jobs) {
  return run_parts(cfg, jobs, kDivergence);
}

SimulationReport run_selection_comparison(const GuConfig& cfg, unsigned jobs) {
  return run_parts(cfg, jobs, kSelection);
}

SimulationReport run_simulation(const GuConfig& cfg, unsigned jobs) {
  return run_parts(cfg, jobs, kDivergence | kSelection);
}

double quantile(std::vector<double> v, double q) {
  require(!v.empty(), ErrorCode::InvalidArgument, "quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

json SimulationReport::summary() const {
  json s;
  s["config"] = to_json(config);
  s["aic_form"] = config.aic_form == AicForm::Paper ? "paper" : "classical";
  s["grid_points"] = config.lambda_grid().size();

  // relative errors per method, and paired lambda/rho differences
  std::map<std::size_t, std::array<double, 4>> by_rep;
  std::array<std::vector<double>, 4> per_method;
  for (const auto& r : relerr_rows) {
    per_method[static_cast<std::size_t>(r.method)].push_back(r.relative_error);
    by_rep[r.replicate][static_cast<std::size_t>(r.method)] = r.relative_error;
  }
  json methods = json::object();
  for (Method m : kMethods) methods[std::string(to_string(m))] = quartiles(per_method[static_cast<std::size_t>(m)]);
  s["relative_error"] = methods;

  std::vector<double> aic_diff, gcv_diff;
  for (const auto& [rep, v] : by_rep) {
    aic_diff.push_back(std::abs(v[0] - v[1]));
    gcv_diff.push_back(std::abs(v[2] - v[3]));
  }
  s["paired_abs_difference"] = {{"AIC", quartiles(aic_diff)}, {"GCV", quartiles(gcv_diff)}};

  std::size_t skipped = 0, interior = 0, gap_violations = 0, checked = 0, failed = 0, monotone = 0;
  for (const auto& c : checks) {
    skipped += c.flat_loss;
    interior += c.loss_interior_minimum;
    gap_violations += c.div_gap_violations;
    checked += c.duality_checked;
    failed += c.duality_failed;
    monotone += c.rho_strictly_decreasing;
  }
  s["replicates_skipped"] = relerr_rows.empty() ? json(nullptr) : json(skipped);
  s["checks"] = {{"rho_strictly_decreasing_replicates", monotone},
                 {"loss_interior_minimum_replicates", relerr_rows.empty() ? json(nullptr) : json(interior)},
                 {"div_gap_outside_unit_interval", gap_violations},
                 {"duality_spot_checks", checked},
                 {"duality_spot_check_failures", failed}};

  if (!divergence_rows.empty()) {
    double min_dl = 1e300, max_dl = -1e300, min_dr = 1e300, max_dr = -1e300;
    double max_gap = 0, sum_gap = 0;
    std::size_t active = 0;
    for (const auto& r : divergence_rows) {
      min_dl = std::min(min_dl, r.div_lambda);
      max_dl = std::max(max_dl, r.div_lambda);
      if (!r.active) continue;
      ++active;
      min_dr = std::min(min_dr, r.div_rho);
      max_dr = std::max(max_dr, r.div_rho);
      const double gap = std::abs(r.div_rho - r.div_rho_exact);
      max_gap = std::max(max_gap, gap);
      sum_gap += gap;
    }
    s["divergence"] = {{"rows", divergence_rows.size()},
                       {"active_rows", active},
                       {"div_lambda_min", min_dl},
                       {"div_lambda_max", max_dl},
                       {"div_rho_min", active ? json(min_dr) : json(nullptr)},
                       {"div_rho_max", active ? json(max_dr) : json(nullptr)},
                       {"closed_form_vs_exact_div_rho_max_abs", max_gap},
                       {"closed_form_vs_exact_div_rho_mean_abs", active ? json(sum_gap / double(active)) : json(nullptr)}};
  }
  s["warnings"] = warnings;
  return s;
}

std::string divergence_csv(const SimulationReport& report) {
  std::ostringstream out;
  out << "replicate,lambda,rho,div_lambda,div_rho\n";
  for (const auto& r : report.divergence_rows)
    out << r.replicate << ',' << io::format_double(r.lambda) << ',' << io::format_double(r.rho) << ','
        << io::format_double(r.div_lambda) << ',' << io::format_double(r.div_rho) << '\n';
  return out.str();
}

std::string relerr_csv(const SimulationReport& report) {
  std::ostringstream out;
  out << "method,replicate,relative_error\n";
  for (const auto& r : report.relerr_rows)
    out << to_string(r.method) << ',' << r.replicate << ',' << io::format_double(r.relative_error) << '\n';
  return out.str();
}

void write_report(const SimulationReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_text(dir / "divergence.csv", divergence_csv(report));
  io::write_text(dir / "relerr.csv", relerr_csv(report));
  io::write_text(dir / "summary.json", report.summary().dump(2) + "\n");
}

}  // namespace l2div
