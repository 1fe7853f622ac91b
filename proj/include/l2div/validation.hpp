#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace l2div::validation {

/// One verification record. Hard checks gate the exit status; soft checks are
/// findings (a formula and an oracle disagreeing) reported without failing.
struct Check {
  std::string suite;
  std::string name;
  double expected = 0;
  double observed = 0;
  double tolerance = 0;
  bool pass = false;
  bool hard = true;
};

std::vector<Check> run_trace_suite();
std::vector<Check> run_duality_suite();
std::vector<Check> run_fd_suite();
std::vector<Check> run_mc_suite(unsigned jobs = 1);
std::vector<Check> run_geometry_suite();

/// suite in {fd, mc, trace, geometry, duality, all}.
std::vector<Check> run_suite(const std::string& suite, unsigned jobs = 1);

nlohmann::json to_json(const std::vector<Check>& checks);
bool all_hard_pass(const std::vector<Check>& checks);

}  // namespace l2div::validation
