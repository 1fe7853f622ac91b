#pragma once

#include <filesystem>
#include <string>

namespace l2div::plots {

/// Divergence curves for the first `replicates` replicates: left panel against
/// log10(n lambda), right panel against log10(rho). Lambda-indexed curves in red,
/// rho-indexed curves in blue.
std::string figure1_svg(const std::string& divergence_csv, std::size_t replicates = 10);

/// Box summaries (min, quartiles, max) of relative error per method.
std::string figure2_svg(const std::string& relerr_csv);

/// Reads divergence.csv and relerr.csv from `dir` and writes figure1.svg / figure2.svg.
void write_figures(const std::filesystem::path& dir);

}  // namespace l2div::plots
