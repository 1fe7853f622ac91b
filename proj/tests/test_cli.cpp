#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "l2div/experiments.hpp"
#include "l2div/fixtures.hpp"
#include "l2div/io.hpp"

using namespace l2div;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path write_spherical_ridge(const fs::path& dir) {
  const Eigen::MatrixXd X = fixtures::spherical_ridge_x();
  const Eigen::VectorXd y = fixtures::spherical_ridge_y();
  std::ostringstream out;
  out << "x1,x2,x3,y\n";
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    out << io::format_double(X(i, 0)) << ',' << io::format_double(X(i, 1)) << ',' << io::format_double(X(i, 2))
        << ',' << io::format_double(y(i)) << '\n';
  io::write_text(dir / "ridge.csv", out.str());
  return dir / "ridge.csv";
}

fs::path write_gu(const fs::path& dir) {
  const auto data = generate_gu_data(GuConfig{}, 0);
  std::ostringstream out;
  out << "x,y\n";
  for (Eigen::Index i = 0; i < data.x.size(); ++i)
    out << io::format_double(data.x(i)) << ',' << io::format_double(data.y(i)) << '\n';
  io::write_text(dir / "gu.csv", out.str());
  return dir / "gu.csv";
}

json stdout_json(const fs::path& dir) { return json::parse(io::read_text(dir / "stdout.txt")); }
json stderr_json(const fs::path& dir) { return json::parse(io::read_text(dir / "stderr.txt")); }

}  // namespace

TEST_CASE("cli fit") {
  const auto dir = testing::scratch("cli_fit");
  const auto ridge = write_spherical_ridge(dir);
  const auto gu = write_gu(dir);

  REQUIRE(testing::run_cli("fit --kind ridge --lambda 0 --data " + ridge.string(), dir) == 0);
  auto j = stdout_json(dir);
  CHECK(j["div"].get<double>() == doctest::Approx(4.0));
  CHECK(j["fitted"].size() == 4);

  REQUIRE(testing::run_cli("fit --kind ridge --rho 1 --data " + ridge.string(), dir) == 0);
  j = stdout_json(dir);
  CHECK(j["active"].get<bool>());
  CHECK(j["div"].get<double>() == doctest::Approx(5.0 / 3.0).epsilon(1e-10));
  CHECK(j["lambda"].get<double>() == doctest::Approx(2.0).epsilon(1e-10));

  REQUIRE(testing::run_cli("fit --kind smoothing --lambda 1e-4 --data " + gu.string(), dir) == 0);
  j = stdout_json(dir);
  CHECK(j["rank"] == 98);
  CHECK(j["div"].get<double>() > 2.0);
  CHECK(j["div"].get<double>() < 100.0);

  REQUIRE(testing::run_cli("fit --kind pspline --num-knots 8 --lambda 1e-2 --out " + (dir / "ps").string() +
                               " --data " + gu.string(),
                           dir) == 0);
  CHECK(json::parse(io::read_text(dir / "ps" / "fit.json"))["d"] == 12);
}

TEST_CASE("cli exit codes and machine-readable errors") {
  const auto dir = testing::scratch("cli_errors");
  const auto ridge = write_spherical_ridge(dir);
  CHECK(testing::run_cli("fit --kind ridge --lambda 1 --rho 1 --data " + ridge.string(), dir) == 2);
  CHECK(testing::run_cli("fit --kind ridge --data " + ridge.string(), dir) == 2);
  CHECK(testing::run_cli("fit --kind lasso --lambda 1 --data " + ridge.string(), dir) == 2);
  CHECK(testing::run_cli("frobnicate", dir) == 2);

  io::write_text(dir / "bad.csv", "x,y\n0.1,1\n0.2,nan\n");
  CHECK(testing::run_cli("fit --kind smoothing --lambda 1 --data " + (dir / "bad.csv").string(), dir) == 3);
  auto err = stderr_json(dir);
  CHECK(err["error"] == "ParseError");
  CHECK(err["message"].get<std::string>().find(":3:") != std::string::npos);

  CHECK(testing::run_cli("fit --kind ridge --lambda -1 --data " + ridge.string(), dir) == 4);
  CHECK(stderr_json(dir)["error"] == "NegativeLambda");

  io::write_text(dir / "tiny.csv", "x,y\n0.1,1\n0.2,2\n0.3,1\n");
  CHECK(testing::run_cli("fit --kind smoothing --lambda 1 --data " + (dir / "tiny.csv").string(), dir) == 3);
  CHECK(stderr_json(dir)["error"] == "TooFewPoints");

  CHECK(testing::run_cli("fit --kind smoothing --lambda 1 --data " + (dir / "absent.csv").string(), dir) == 3);

  io::write_text(dir / "cfg.json", R"({"replicate": 3})");
  CHECK(testing::run_cli("simulate --config " + (dir / "cfg.json").string() + " --out " + (dir / "r").string(), dir) ==
        3);
  CHECK(stderr_json(dir)["error"] == "ConfigError");

  CHECK(testing::run_cli("plot-data " + (dir / "nothing").string(), dir) == 3);
  CHECK(stderr_json(dir)["error"] == "MissingReport");
}

TEST_CASE("cli select") {
  const auto dir = testing::scratch("cli_select");
  const auto gu = write_gu(dir);
  REQUIRE(testing::run_cli("select --kind smoothing --data " + gu.string() + " --grid values:0.001 --out " +
                               (dir / "one").string(),
                           dir) == 0);
  CHECK(stdout_json(dir)["chosen_index"]["gcv"] == 0);

  REQUIRE(testing::run_cli("select --kind smoothing --data " + gu.string() + " --grid log10nl:-5:0.05:-1 --out " +
                               (dir / "full").string(),
                           dir) == 0);
  const auto table = io::read_csv(dir / "full" / "criterion_table.csv");
  CHECK(table.header == std::vector<std::string>{"theta", "rss", "div", "aic", "gcv"});
  CHECK(table.rows.rows() == 81);
  const auto side = json::parse(io::read_text(dir / "full" / "criterion_table.json"));
  const double lambda_hat = side["chosen_theta"];

  REQUIRE(testing::run_cli("select --kind smoothing --indexing rho --criterion gcv --data " + gu.string() +
                               " --out " + (dir / "rho").string(),
                           dir) == 0);
  const auto rho_side = json::parse(io::read_text(dir / "rho" / "criterion_table.json"));
  CHECK(rho_side["indexing"] == "rho");
  CHECK(io::read_csv(dir / "rho" / "criterion_table.csv").rows.rows() == 81);
  // The rho table's chosen point maps back to a lambda on the original grid.
  CHECK(rho_side["chosen_counterpart"].get<double>() > 0);
  CHECK(lambda_hat > 0);
}

TEST_CASE("cli simulate determinism, seed fallback and noiseless run") {
  const auto dir = testing::scratch("cli_simulate");
  const auto run = [&](const std::string& name, const std::string& extra, const std::string& env = "") {
    REQUIRE(testing::run_cli("simulate --replicates 2 --out " + (dir / name).string() + " " + extra, dir, env) == 0);
  };
  run("a", "--seed 7 --jobs 1");
  run("b", "--seed 7 --jobs 2");
  run("c", "", "L2DIV_SEED=7");
  run("d", "--seed 8");
  for (const char* file : {"divergence.csv", "relerr.csv", "summary.json"}) {
    CHECK(io::read_text(dir / "a" / file) == io::read_text(dir / "b" / file));
    CHECK(io::read_text(dir / "a" / file) == io::read_text(dir / "c" / file));
  }
  CHECK(io::read_text(dir / "a" / "divergence.csv") != io::read_text(dir / "d" / "divergence.csv"));
  CHECK(io::read_csv(dir / "a" / "divergence.csv").rows.rows() == 2 * 81);

  run("clean", "--sigma2 0");
  const auto raw = io::parse_raw_csv(io::read_text(dir / "clean" / "relerr.csv"));
  for (const auto& row : raw.rows)
    if (row[0].rfind("GCV", 0) == 0) CHECK(std::stod(row[2]) <= 1e-6);

  REQUIRE(testing::run_cli("plot-data " + (dir / "a").string(), dir) == 0);
  CHECK(fs::exists(dir / "a" / "figure1.svg"));
  CHECK(fs::exists(dir / "a" / "figure2.svg"));
}

TEST_CASE("cli validate") {
  const auto dir = testing::scratch("cli_validate");
  REQUIRE(testing::run_cli("validate --suite trace --out " + dir.string(), dir) == 0);
  const auto j = json::parse(io::read_text(dir / "validation.json"));
  CHECK(j["pass"].get<bool>());
  CHECK(j["checks"].size() == j["total"].get<std::size_t>());
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("check"));
    CHECK(c.contains("expected"));
    CHECK(c.contains("observed"));
    CHECK(c.contains("tolerance"));
    CHECK(c.contains("pass"));
  }
  REQUIRE(testing::run_cli("validate --suite fd", dir) == 0);
  const auto fd = stdout_json(dir);
  bool spherical_seen = false;
  for (const auto& c : fd["checks"])
    if (c["check"].get<std::string>().find("spherical") != std::string::npos) {
      spherical_seen = true;
      CHECK(c["pass"].get<bool>());
    }
  CHECK(spherical_seen);
}
