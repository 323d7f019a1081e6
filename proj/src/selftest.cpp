#include "fracsource/pipeline.hpp"

#include "fracsource/fbm.hpp"
#include "fracsource/fintegral.hpp"
#include "fracsource/mlf.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

namespace fracsource::pipeline {

namespace {

bool suite_mlf() {
  // exponential reduction and positivity/monotonicity on a coarse grid
  for (int i = 0; i <= 40; ++i) {
    const double x = -30.0 * i / 40.0;
    if (std::fabs(mlf::ml_eval(1.0, 1.0, x) - std::exp(x)) > 1e-12 * std::exp(x) + 1e-300)
      return false;
  }
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 60; ++i) {
    const double x = std::pow(10.0, -2.0 + 4.0 * i / 60.0);
    const double v = mlf::ml_eval(0.7, 1.0, -x);
    if (!(v >= 0.0) || v > prev + 1e-14) return false;
    prev = v;
  }
  prev = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 50; ++i) {
    const double t = 2.0 * i / 50.0;
    const double v = mlf::ml_phi(0.6, 4.0, t);
    if (!(v > 0.0) || v > prev * (1.0 + 1e-12)) return false;
    prev = v;
  }
  return true;
}

bool suite_fbm() {
  if (std::fabs(fbm::fbm_covariance(0.5, 2.0, 3.0) - 2.0) > 1e-14) return false;
  if (std::fabs(fbm::fbm_covariance(0.75, 1.0, 1.0) - 1.0) > 1e-14) return false;
  const auto grid = fbm::TimeGrid::uniform(1.0, 16);
  const auto a = fbm::sample_fbm_circulant(0.7, grid, 4000, 7);
  const auto b = fbm::sample_fbm_circulant(0.7, grid, 4000, 7);
  if (a.data != b.data) return false; // determinism
  double var = 0.0;
  for (std::size_t p = 0; p < a.n_paths; ++p) {
    const double v = a(p, 16);
    var += v * v;
  }
  var /= static_cast<double>(a.n_paths);
  const double expect = std::pow(1.0, 2.0 * 0.7);
  const double se = expect * std::sqrt(2.0 / static_cast<double>(a.n_paths));
  return std::fabs(var - expect) < 5.0 * se;
}

bool suite_isometry() {
  for (double H : {0.3, 0.5, 0.75}) {
    const auto p = fintegral::KernelParams::make(H, 1.0);
    const auto one = fintegral::WeightedFunction::constant(1.0, 1.0);
    const double m = fintegral::second_moment_pair(p, one, one, 1e-8);
    if (std::fabs(m - 1.0) > 1e-4) return false; // Var B^H(1) = 1
  }
  return true;
}

} // namespace

bool run_selftest(bool verbose) {
  struct Entry {
    const char* name;
    bool (*fn)();
  };
  const Entry entries[] = {
      {"mittag-leffler", suite_mlf}, {"fbm-samplers", suite_fbm}, {"isometry", suite_isometry}};
  bool all_ok = true;
  for (const auto& e : entries) {
    bool ok = false;
    try {
      ok = e.fn();
    } catch (const std::exception& ex) {
      if (verbose) std::printf("[selftest] %-16s EXCEPTION: %s\n", e.name, ex.what());
      ok = false;
    }
    if (verbose) std::printf("[selftest] %-16s %s\n", e.name, ok ? "ok" : "FAILED");
    all_ok = all_ok && ok;
  }
  return all_ok;
}

} // namespace fracsource::pipeline
