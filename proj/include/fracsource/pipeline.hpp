#pragma once

#include "fracsource/config.hpp"

#include <string>

namespace fracsource::pipeline {

// Runs the forward Monte Carlo and writes ensemble_moments.csv,
// covariance.csv and run_summary.json into out_dir.
void run_simulate(const RunConfig& cfg, const std::string& out_dir);

// Reads a moments CSV (plus optional covariance CSV), inverts the modal
// formulas and writes reconstruction.csv / reconstruction.json.
void run_reconstruct(const RunConfig& cfg, const std::string& moments_path,
                     const std::string& covariance_path, const std::string& out_dir);

// Writes instability.csv with the decay/amplification table.
void run_instability(const RunConfig& cfg, double gamma, const std::string& out_dir);

// Reduced property suites (Mittag-Leffler, fBm, isometry); returns true when
// every suite passes. verbose prints one line per suite.
bool run_selftest(bool verbose);

} // namespace fracsource::pipeline
