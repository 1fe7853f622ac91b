#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "l2div/experiments.hpp"
#include "l2div/io.hpp"
#include "l2div/plots.hpp"

using namespace l2div;

namespace {

GuConfig small_config() {
  GuConfig cfg;
  cfg.replicates = 6;
  cfg.seed = 7;
  return cfg;
}

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("gu data: truth, grid and determinism") {
  CHECK(gu_truth(0.25) == doctest::Approx(-2.0));
  CHECK(gu_truth(0.75) == doctest::Approx(4.0));
  GuConfig cfg = small_config();
  const auto a = generate_gu_data(cfg, 3);
  const auto b = generate_gu_data(cfg, 3);
  CHECK(a.y == b.y);
  CHECK(a.x(0) == doctest::Approx(0.005));
  CHECK(a.x(99) == doctest::Approx(0.995));
  CHECK(generate_gu_data(cfg, 4).y != a.y);
  CHECK_THROWS_AS(generate_gu_data(cfg, 6), Error);
  cfg.sigma2 = 0;
  const auto clean = generate_gu_data(cfg, 0);
  CHECK(clean.y == clean.f);
  CHECK(cfg.lambda_grid().size() == 81);
}

TEST_CASE("gu config: json round trip and rejection of unknown keys") {
  GuConfig cfg;
  cfg.replicates = 12;
  cfg.seed = 42;
  const auto back = gu_config_from_json(to_json(cfg));
  CHECK(back.replicates == 12);
  CHECK(back.seed == 42);
  CHECK(back.grid_step == 0.05);
  try {
    gu_config_from_json(nlohmann::json{{"replicate", 3}});
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
  CHECK_THROWS_AS(gu_config_from_json(nlohmann::json{{"n", "many"}}), Error);
  GuConfig bad;
  bad.grid_step = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = GuConfig{};
  bad.n = 3;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("simulation: row counts, invariants and ranges") {
  const auto report = run_simulation(small_config(), 1);
  CHECK(report.divergence_rows.size() == 6 * 81);
  CHECK(report.relerr_rows.size() == 4 * 6);
  for (const auto& row : report.divergence_rows) {
    CHECK(row.div_lambda > 2.0);
    CHECK(row.div_lambda <= 100.0);
    if (row.active) {
      CHECK(row.div_rho > 2.0);
      CHECK(row.div_rho <= 99.0);
    }
  }
  for (const auto& row : report.relerr_rows) {
    CHECK(row.relative_error >= 0.0);
    CHECK(row.relative_error <= 100.0);
  }
  for (const auto& c : report.checks) {
    CHECK(c.rho_strictly_decreasing);
    CHECK(c.duality_failed == 0);
  }
  std::set<std::string> methods;
  for (const auto& row : report.relerr_rows) methods.insert(std::string(to_string(row.method)));
  CHECK(methods == std::set<std::string>{"AIC_lambda", "AIC_rho", "GCV_lambda", "GCV_rho"});
}

TEST_CASE("simulation: output is independent of the worker count") {
  const auto a = run_simulation(small_config(), 1);
  const auto b = run_simulation(small_config(), 4);
  CHECK(divergence_csv(a) == divergence_csv(b));
  CHECK(relerr_csv(a) == relerr_csv(b));
  CHECK(a.summary().dump() == b.summary().dump());
}

TEST_CASE("simulation: noiseless data") {
  GuConfig cfg = small_config();
  cfg.sigma2 = 0;
  const auto report = run_simulation(cfg, 1);
  // Without noise every replicate is identical, so all methods agree across replicates.
  for (const auto& row : report.relerr_rows) {
    const auto& first = report.relerr_rows[static_cast<std::size_t>(row.method)];
    CHECK(row.relative_error == first.relative_error);
  }
  for (const auto& row : report.relerr_rows)
    if (row.method == Method::GcvLambda || row.method == Method::GcvRho) CHECK(row.relative_error <= 1e-6);
}

TEST_CASE("report files and figures") {
  const auto dir = testing::scratch("experiments_report");
  const auto report = run_simulation(small_config(), 2);
  write_report(report, dir);
  const std::string div = io::read_text(dir / "divergence.csv");
  CHECK(div.rfind("replicate,lambda,rho,div_lambda,div_rho\n", 0) == 0);
  CHECK(io::read_text(dir / "relerr.csv").rfind("method,replicate,relative_error\n", 0) == 0);
  const auto summary = nlohmann::json::parse(io::read_text(dir / "summary.json"));
  CHECK(summary.contains("paired_abs_difference"));

  const std::string fig1 = plots::figure1_svg(div);
  CHECK(count(fig1, "class=\"div-lambda\"") == 2 * 6);
  CHECK(count(fig1, "class=\"div-rho\"") == 2 * 6);
  CHECK(fig1 == plots::figure1_svg(div));
  const std::string fig2 = plots::figure2_svg(io::read_text(dir / "relerr.csv"));
  for (const char* m : {"AIC_lambda", "AIC_rho", "GCV_lambda", "GCV_rho"}) CHECK(fig2.find(m) != std::string::npos);

  CHECK_THROWS_AS(plots::figure1_svg("replicate,lambda,rho,div_lambda,div_rho\n"), Error);
  const auto empty = testing::scratch("experiments_empty");
  try {
    plots::write_figures(empty);
    FAIL("expected MissingReport");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingReport);
  }
}

TEST_CASE("quantile interpolation") {
  CHECK(quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(quantile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(quantile({5}, 0.25) == 5.0);
}

TEST_CASE("figure 1 draws the first 10 replicates: 20 polylines per panel") {
  GuConfig cfg = small_config();
  cfg.replicates = 12;
  const std::string svg = plots::figure1_svg(divergence_csv(run_divergence_curves(cfg, 1)));
  CHECK(count(svg, "<polyline") == 40);
  CHECK(count(svg, "class=\"div-lambda\"") == 20);
  CHECK(count(svg, "class=\"div-rho\"") == 20);
}
