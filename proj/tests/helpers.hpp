#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include <Eigen/Dense>

namespace testing {

inline double max_abs(const Eigen::MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }

inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::path(L2DIV_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Runs the CLI with stdout and stderr redirected into files under dir; returns the exit status.
inline int run_cli(const std::string& args, const std::filesystem::path& dir, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string(L2DIV_CLI_PATH) + " " + args + " > " +
                          (dir / "stdout.txt").string() + " 2> " + (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace testing
