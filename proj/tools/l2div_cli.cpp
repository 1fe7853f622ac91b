// Command line front end: fit, select, simulate, validate, plot-data.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "l2div/builders.hpp"
#include "l2div/dr_engine.hpp"
#include "l2div/experiments.hpp"
#include "l2div/functional.hpp"
#include "l2div/io.hpp"
#include "l2div/plots.hpp"
#include "l2div/selection.hpp"
#include "l2div/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace l2div;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Options {
  std::string kind = "smoothing";
  std::string data;
  std::string y_path;
  std::optional<double> lambda;
  std::optional<double> rho;
  std::string grid = "log10nl:-5:0.05:-1";
  std::string indexing = "lambda";
  std::string criterion = "gcv";
  std::string aic_form = "paper";
  std::string config;
  std::string out;
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<double> sigma2;
  int degree = 3;
  std::string knots;
  int num_knots = 10;
  std::string suite = "all";
  std::string report_dir;
};

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

AicForm parse_aic_form(const std::string& s) { return s == "classical" ? AicForm::Classical : AicForm::Paper; }

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) values.push_back(io::parse_number(cell, what, 1));
  return values;
}

RegressionProblem<double> load_problem(const Options& opt) {
  require(!opt.data.empty(), ErrorCode::InvalidArgument, "--data is required");
  if (opt.kind == "functional") {
    require(!opt.y_path.empty(), ErrorCode::InvalidArgument, "--y is required for functional problems");
    const auto curves = io::read_csv(opt.data);
    const Eigen::VectorXd grid = io::numeric_header(curves, opt.data);
    const auto ytab = io::read_csv(opt.y_path);
    const Eigen::VectorXd y = ytab.rows.col(io::column(ytab.header, "y", opt.y_path));
    return build_functional(curves.rows, grid, y).first;
  }
  const auto table = io::read_csv(opt.data);
  const auto ycol = io::column(table.header, "y", opt.data);
  const Eigen::VectorXd y = table.rows.col(ycol);
  if (opt.kind == "ridge") {
    Eigen::MatrixXd X(table.rows.rows(), table.rows.cols() - 1);
    for (Eigen::Index j = 0, k = 0; j < table.rows.cols(); ++j)
      if (j != static_cast<Eigen::Index>(ycol)) X.col(k++) = table.rows.col(j);
    return build_ridge(X, y);
  }
  const Eigen::VectorXd x = table.rows.col(io::column(table.header, "x", opt.data));
  if (opt.kind == "smoothing") return build_smoothing_spline(x, y);
  require(opt.kind == "pspline", ErrorCode::InvalidArgument, "unknown kind '" + opt.kind + "'");
  Eigen::VectorXd knots;
  if (!opt.knots.empty()) {
    const auto k = parse_list(opt.knots, "--knots");
    knots = Eigen::Map<const Eigen::VectorXd>(k.data(), static_cast<Eigen::Index>(k.size()));
  } else {
    require(opt.num_knots >= 1, ErrorCode::InvalidArgument, "--num-knots must be positive");
    knots.resize(opt.num_knots);
    const double lo = x.minCoeff(), hi = x.maxCoeff();
    for (int k = 0; k < opt.num_knots; ++k) knots(k) = lo + (hi - lo) * (k + 1) / (opt.num_knots + 1);
  }
  return build_penalized_spline(x, y, opt.degree, knots);
}

void emit(const Options& opt, const std::string& filename, const json& j) {
  if (!opt.out.empty()) {
    fs::create_directories(opt.out);
    io::write_text(fs::path(opt.out) / filename, j.dump(2) + "\n");
  }
  std::cout << j.dump(2) << "\n";
}

int cmd_fit(const Options& opt) {
  require(opt.lambda.has_value() != opt.rho.has_value(), ErrorCode::InvalidArgument,
          "exactly one of --lambda or --rho is required");
  const auto problem = load_problem(opt);
  const auto sys = decompose(problem);
  json j;
  j["kind"] = to_string(problem.kind);
  j["n"] = problem.n();
  j["d"] = problem.d();
  j["rank"] = sys.rank;
  if (opt.lambda) {
    const auto fit = fit_penalty(sys, problem.y, *opt.lambda);
    j["indexing"] = "lambda";
    j["lambda"] = fit.lambda;
    j["rho"] = fit.rho_induced;
    j["div"] = fit.div_lambda;
    j["rss"] = fit.rss;
    j["fitted"] = vec_json(fit.mu);
    j["coefficients"] = vec_json(fit.beta);
    j["warnings"] = json::array();
  } else {
    const auto fit = fit_constraint(sys, problem.y, *opt.rho);
    j["indexing"] = "rho";
    j["rho"] = fit.rho;
    j["lambda"] = fit.lambda_star;
    j["active"] = fit.active;
    j["div"] = fit.div_rho;
    j["tau"] = fit.tau;
    j["phi"] = vec_json(fit.phi);
    j["rss"] = fit.rss;
    j["fitted"] = vec_json(fit.mu);
    j["coefficients"] = vec_json(fit.beta);
    j["warnings"] = fit.warnings;
  }
  emit(opt, "fit.json", j);
  return 0;
}

// Grid syntax: log10nl:start:step:end (lambda = 10^g / n), log10:start:step:end
// (lambda = 10^g), or values:v1,v2,... taken directly in the requested indexing.
struct GridSpec {
  bool direct = false;
  std::vector<double> values;
};

GridSpec parse_grid(const std::string& spec, Eigen::Index n) {
  const auto colon = spec.find(':');
  require(colon != std::string::npos, ErrorCode::GridError, "grid spec needs a prefix: '" + spec + "'");
  const std::string head = spec.substr(0, colon), rest = spec.substr(colon + 1);
  GridSpec g;
  if (head == "values") {
    g.direct = true;
    g.values = parse_list(rest, "--grid");
    return g;
  }
  require(head == "log10nl" || head == "log10", ErrorCode::GridError, "unknown grid prefix '" + head + "'");
  std::string r = rest;
  std::replace(r.begin(), r.end(), ':', ',');
  const auto parts = parse_list(r, "--grid");
  require(parts.size() == 3 && parts[1] > 0 && parts[0] <= parts[2], ErrorCode::GridError,
          "grid spec must be start:step:end with step > 0");
  const auto count = static_cast<std::size_t>(std::llround((parts[2] - parts[0]) / parts[1])) + 1;
  for (std::size_t k = 0; k < count; ++k) {
    const double lambda = std::pow(10.0, parts[0] + double(k) * parts[1]);
    g.values.push_back(head == "log10nl" ? lambda / double(n) : lambda);
  }
  return g;
}

int cmd_select(const Options& opt) {
  const auto problem = load_problem(opt);
  const auto sys = decompose(problem);
  require(opt.indexing == "lambda" || opt.indexing == "rho", ErrorCode::InvalidArgument, "bad --indexing");
  const Indexing ix = opt.indexing == "lambda" ? Indexing::Lambda : Indexing::Rho;
  GridSpec g = parse_grid(opt.grid, problem.n());
  std::vector<double> grid = g.values;
  if (ix == Indexing::Rho && !g.direct) {
    grid.clear();
    for (double lambda : g.values) grid.push_back(fit_penalty(sys, problem.y, lambda).rho_induced);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  }
  const auto table = evaluate_grid(sys, problem.y, grid, ix, parse_aic_form(opt.aic_form));

  std::ostringstream csv;
  csv << "theta,rss,div,aic,gcv\n";
  for (std::size_t i = 0; i < table.size(); ++i)
    csv << io::format_double(table.grid[i]) << ',' << io::format_double(table.rss[i]) << ','
        << io::format_double(table.div[i]) << ',' << io::format_double(table.aic[i]) << ','
        << io::format_double(table.gcv[i]) << '\n';

  const std::size_t chosen = opt.criterion == "aic" ? table.chosen_aic : table.chosen_gcv;
  json side = {{"indexing", std::string(to_string(ix))},
               {"criterion", opt.criterion},
               {"aic_form", opt.aic_form},
               {"rows", table.size()},
               {"chosen_index", {{"aic", table.chosen_aic}, {"gcv", table.chosen_gcv}}},
               {"chosen_theta", table.grid[chosen]},
               {"chosen_counterpart", table.counterpart[chosen]},
               {"chosen_div", table.div[chosen]}};
  if (!opt.out.empty()) {
    fs::create_directories(opt.out);
    io::write_text(fs::path(opt.out) / "criterion_table.csv", csv.str());
    io::write_text(fs::path(opt.out) / "criterion_table.json", side.dump(2) + "\n");
  } else {
    std::cout << csv.str();
  }
  std::cout << side.dump() << "\n";
  return 0;
}

int cmd_simulate(const Options& opt) {
  GuConfig cfg;
  bool config_seed = false;
  if (!opt.config.empty()) {
    json j;
    try {
      j = json::parse(io::read_text(opt.config));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, std::string("invalid JSON: ") + e.what());
    }
    cfg = gu_config_from_json(j);
    config_seed = j.contains("seed");
  }
  if (opt.seed) {
    cfg.seed = *opt.seed;
  } else if (!config_seed) {
    if (const char* env = std::getenv("L2DIV_SEED")) {
      try {
        cfg.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "L2DIV_SEED is not an unsigned integer");
      }
    }
  }
  if (opt.replicates) cfg.replicates = *opt.replicates;
  if (opt.sigma2) cfg.sigma2 = *opt.sigma2;
  cfg.aic_form = parse_aic_form(opt.aic_form);
  cfg.validate();
  const fs::path out = opt.out.empty() ? fs::path("report") : fs::path(opt.out);
  const auto report = run_simulation(cfg, opt.jobs);
  write_report(report, out);
  std::cout << json{{"out", out.string()},
                    {"divergence_rows", report.divergence_rows.size()},
                    {"relerr_rows", report.relerr_rows.size()}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_validate(const Options& opt) {
  const auto checks = validation::run_suite(opt.suite, opt.jobs);
  emit(opt, "validation.json", validation::to_json(checks));
  return validation::all_hard_pass(checks) ? 0 : kExitNumeric;
}

int cmd_plot_data(const Options& opt) {
  const fs::path dir = opt.report_dir.empty() ? fs::path(opt.out.empty() ? "report" : opt.out) : fs::path(opt.report_dir);
  plots::write_figures(dir);
  std::cout << json{{"figure1", (dir / "figure1.svg").string()}, {"figure2", (dir / "figure2.svg").string()}}.dump()
            << "\n";
  return 0;
}

void add_problem_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--kind", opt.kind, "problem kind")
      ->check(CLI::IsMember({"smoothing", "pspline", "ridge", "functional"}));
  cmd->add_option("--data", opt.data, "input CSV (x,y | x1..xp,y | functional curves)")->required();
  cmd->add_option("--y", opt.y_path, "response CSV for functional problems (header y)");
  cmd->add_option("--degree", opt.degree, "penalized spline order p");
  cmd->add_option("--knots", opt.knots, "penalized spline knots, comma separated");
  cmd->add_option("--num-knots", opt.num_knots, "number of equally spaced knots when --knots is absent");
  cmd->add_option("--aic-form", opt.aic_form)->check(CLI::IsMember({"paper", "classical"}));
  cmd->add_option("--out", opt.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"l2-regularized regression with divergence in penalty and constraint form"};
  app.require_subcommand(1);
  Options opt;

  auto* fit = app.add_subcommand("fit", "fit one tuning value");
  add_problem_options(fit, opt);
  auto* lambda_opt = fit->add_option("--lambda", opt.lambda, "penalty parameter");
  auto* rho_opt = fit->add_option("--rho", opt.rho, "constraint parameter");
  lambda_opt->excludes(rho_opt);

  auto* select = app.add_subcommand("select", "evaluate AIC/GCV over a tuning grid");
  add_problem_options(select, opt);
  select->add_option("--grid", opt.grid, "log10nl:start:step:end | log10:start:step:end | values:v1,...");
  select->add_option("--indexing", opt.indexing)->check(CLI::IsMember({"lambda", "rho"}));
  select->add_option("--criterion", opt.criterion)->check(CLI::IsMember({"aic", "gcv"}));

  auto* simulate = app.add_subcommand("simulate", "run the smoothing spline simulation study");
  simulate->add_option("--config", opt.config, "JSON config");
  simulate->add_option("--out", opt.out, "report directory");
  simulate->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", opt.seed, "RNG seed (fallback: L2DIV_SEED)");
  simulate->add_option("--replicates", opt.replicates);
  simulate->add_option("--sigma2", opt.sigma2);
  simulate->add_option("--aic-form", opt.aic_form)->check(CLI::IsMember({"paper", "classical"}));

  auto* validate = app.add_subcommand("validate", "check closed forms against numerical oracles");
  validate->add_option("--suite", opt.suite)->check(CLI::IsMember({"fd", "mc", "trace", "geometry", "duality", "all"}));
  validate->add_option("--out", opt.out, "directory for validation.json");
  validate->add_option("--jobs", opt.jobs)->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot-data", "render figure1.svg and figure2.svg from a report");
  plot->add_option("report", opt.report_dir, "report directory");
  plot->add_option("--out", opt.out, "report directory (alternative to the positional argument)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*fit && !opt.lambda && !opt.rho) {
    std::cerr << json{{"error", "UsageError"}, {"message", "fit needs --lambda or --rho"}}.dump() << "\n";
    return kExitUsage;
  }

  try {
    if (*fit) return cmd_fit(opt);
    if (*select) return cmd_select(opt);
    if (*simulate) return cmd_simulate(opt);
    if (*validate) return cmd_validate(opt);
    if (*plot) return cmd_plot_data(opt);
  } catch (const Error& e) {
    std::cerr << json{{"error", to_string(e.code())}, {"message", e.what()}}.dump() << "\n";
    return is_data_error(e.code()) ? kExitData : kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
