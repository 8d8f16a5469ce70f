#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "stsscore/report/run.hpp"

namespace stsscore {

// Writes SVG figures for a run and returns the files written, sorted:
//   similarity_0_5 / mqm: scatter_<metric>.svg — label (x, rescaled to [0,1]) against
//     score (y) with the identity diagonal
//   binary: density_<metric>.svg — per-class Gaussian KDE of scores (Scott's bandwidth),
//     plus roc.svg — one curve per metric with its AUC in the legend
// No metrics → no files.
std::vector<std::filesystem::path> emit_figures(const BenchmarkRun& run, const std::filesystem::path& out_dir);

// Gaussian kernel density estimate evaluated at `at`; bandwidth = σ·n^(−1/5)
// with σ the sample standard deviation (floored for degenerate samples).
std::vector<double> kde(std::span<const double> samples, std::span<const double> at);

}  // namespace stsscore
