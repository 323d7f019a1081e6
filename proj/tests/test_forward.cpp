#include "fracsource/forward.hpp"

#include "fracsource/errors.hpp"
#include "fracsource/quad.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace fracsource;
using forward::Domain;

namespace {

forward::SourceSpec unit_source(int K) {
  forward::SourceSpec src;
  src.f.assign(K, 1.0);
  src.g.assign(K, 1.0);
  src.h.type = forward::TimeFunction::Type::Constant;
  src.h.value = 1.0;
  src.h.lower_bound = 1.0;
  return src;
}

} // namespace

TEST_CASE("eigensystem: interval eigenvalues and degenerate rectangle pairs") {
  const auto sys = forward::build_eigensystem(Domain::interval(1.0), 3);
  CHECK(sys.lambda(0) == doctest::Approx(M_PI * M_PI).epsilon(1e-14));
  CHECK(sys.lambda(1) == doctest::Approx(4.0 * M_PI * M_PI).epsilon(1e-14));
  CHECK(sys.lambda(2) == doctest::Approx(9.0 * M_PI * M_PI).epsilon(1e-14));

  const auto rect = forward::build_eigensystem(Domain::rectangle(1.0, 1.0), 4);
  CHECK(rect.lambda(0) == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-14));
  CHECK(rect.lambda(1) == doctest::Approx(5.0 * M_PI * M_PI).epsilon(1e-14));
  CHECK(rect.lambda(2) == doctest::Approx(5.0 * M_PI * M_PI).epsilon(1e-14));
  CHECK(rect.lambda(3) == doctest::Approx(8.0 * M_PI * M_PI).epsilon(1e-14));
}

TEST_CASE("eigensystem: orthonormality via Gauss quadrature") {
  const auto sys = forward::build_eigensystem(Domain::interval(1.3), 4);
  const auto& gl = quad::gl_rule(48);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b <= a; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < gl.x.size(); ++i) {
        const double x = 0.65 * (gl.x[i] + 1.0);
        acc += 0.65 * gl.w[i] * sys.eval(a, x) * sys.eval(b, x);
      }
      CHECK(std::fabs(acc - (a == b ? 1.0 : 0.0)) < 1e-10);
    }
}

TEST_CASE("sim config validation rejects the bad hypothesis") {
  forward::SimConfig cfg;
  cfg.alpha = 0.6;
  cfg.hurst = 0.3;
  CHECK_THROWS_WITH_AS(cfg.validate(),
                       doctest::Contains("alpha + H > 1"), config_error);
  cfg.alpha = 1.2;
  cfg.hurst = 0.5;
  CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("time factor validation") {
  forward::TimeFunction h;
  h.type = forward::TimeFunction::Type::SinOffset;
  h.offset = 1.0;
  h.amplitude = 0.5;
  h.frequency = 3.0;
  h.lower_bound = 0.5;
  h.validate(1.0);
  h.lower_bound = 0.9; // dips below: sin reaches -0.5
  CHECK_THROWS_AS(h.validate(2.0), config_error);
  h.lower_bound = 0.0;
  CHECK_THROWS_AS(h.validate(1.0), config_error);
}

TEST_CASE("deterministic coefficient: alpha=1 closed form and zero source") {
  forward::SimConfig cfg;
  cfg.alpha = 1.0;
  cfg.hurst = 0.5;
  cfg.K = 3;
  const auto sys = forward::build_eigensystem(Domain::interval(1.0), 3);
  auto src = unit_source(3);
  for (int k = 0; k < 3; ++k) {
    const double lam = sys.lambda(k);
    const double want = (1.0 - std::exp(-lam * 1.0)) / lam;
    const double got = forward::deterministic_coefficient(k, 1.0, cfg, src, sys);
    CHECK(std::fabs(got - want) < 1e-8 * want);
  }
  src.f[1] = 0.0;
  CHECK(forward::deterministic_coefficient(1, 1.0, cfg, src, sys) == 0.0);
}

TEST_CASE("deterministic coefficient: frozen refined-grid oracle (alpha=0.7)") {
  forward::SimConfig cfg;
  cfg.alpha = 0.7;
  cfg.hurst = 0.6;
  cfg.K = 1;
  const auto sys = forward::build_eigensystem(Domain::interval(1.0), 1);
  const auto src = unit_source(1);
  const double got = forward::deterministic_coefficient(0, 1.0, cfg, src, sys);
  // midpoint rule at N = 1.6e6 on the substituted integral, Richardson-extrapolated
  CHECK(got == doctest::Approx(0.09760391241051).epsilon(1e-9));
}

TEST_CASE("stochastic coefficient samples: zero g short-circuits; mean centered") {
  forward::SimConfig cfg;
  cfg.alpha = 0.8;
  cfg.hurst = 0.6;
  cfg.n = 128;
  cfg.K = 2;
  cfg.paths = 10000;
  cfg.seed = 11;
  const auto sys = forward::build_eigensystem(Domain::interval(1.0), 2);
  auto src = unit_source(2);
  src.g[0] = 0.0;
  const auto grid = fbm::TimeGrid::uniform(cfg.T, cfg.n);
  const auto bm = fbm::sample_bm_increments(grid, cfg.paths, cfg.seed);

  const auto zero = forward::stochastic_coefficient_samples(0, cfg, src, sys, bm);
  for (double v : zero) CHECK(v == 0.0);

  const auto s1 = forward::stochastic_coefficient_samples(1, cfg, src, sys, bm);
  double mean = 0.0, var = 0.0;
  for (double v : s1) mean += v;
  mean /= static_cast<double>(s1.size());
  for (double v : s1) var += (v - mean) * (v - mean);
  var /= static_cast<double>(s1.size() - 1);
  CHECK(std::fabs(mean) < 4.0 * std::sqrt(var / static_cast<double>(s1.size())));

  // variance agrees with the deterministic Gram entry
  const auto p = fintegral::KernelParams::make(cfg.hurst, cfg.T);
  const auto psi = fintegral::WeightedFunction::ml_kernel(cfg.alpha, sys.lambda(1), cfg.T);
  const double det = fintegral::second_moment_pair(p, psi, psi, 1e-7);
  const double se = var * std::sqrt(2.0 / static_cast<double>(s1.size()));
  CHECK(std::fabs(var - det) < 3.0 * (se + 1e-7));
}

TEST_CASE("simulate_ensemble: moments match the modal formulas") {
  forward::SimConfig cfg;
  cfg.alpha = 0.8;
  cfg.hurst = 0.6;
  cfg.n = 256;
  cfg.K = 3;
  cfg.paths = 20000;
  cfg.seed = 2025;
  const auto sys = forward::build_eigensystem(Domain::interval(1.0), cfg.K);
  forward::SourceSpec src = unit_source(cfg.K);
  src.f = {1.0, -0.5, 0.25};
  src.g = {1.0, 0.8, -0.6};
  const auto result = forward::simulate_ensemble(cfg, src, sys);
  const auto& mom = result.moments;

  const auto factors_p = fintegral::KernelParams::make(cfg.hurst, cfg.T);
  for (int k = 0; k < cfg.K; ++k) {
    const double A = forward::ml_time_integral(cfg.alpha, sys.lambda(k), cfg.T, src.h);
    CHECK(std::fabs(mom.mean[k] - src.f[k] * A) < 4.0 * mom.se_mean[k]);
  }
  for (int k = 0; k < cfg.K; ++k)
    for (int l = 0; l <= k; ++l) {
      const auto pk =
          fintegral::WeightedFunction::ml_kernel(cfg.alpha, sys.lambda(k), cfg.T);
      const auto pl =
          fintegral::WeightedFunction::ml_kernel(cfg.alpha, sys.lambda(l), cfg.T);
      const double B = fintegral::second_moment_pair(factors_p, pk, pl, 1e-7);
      const double want = src.g[k] * src.g[l] * B;
      CHECK(std::fabs(mom.covariance(k, l) - want) <
            3.0 * (mom.se_covariance(k, l) + 1e-7));
      // correlation sign equals sign(g_k g_l)
      if (k != l)
        CHECK(mom.covariance(k, l) * (src.g[k] * src.g[l]) > 0.0);
    }
}

TEST_CASE("simulate_ensemble: classical heat/white-noise closed forms (alpha=1,H=1/2)") {
  forward::SimConfig cfg;
  cfg.alpha = 1.0;
  cfg.hurst = 0.5;
  cfg.n = 512;
  cfg.K = 3;
  cfg.paths = 20000;
  cfg.seed = 77;
  const auto sys = forward::build_eigensystem(Domain::interval(1.0), cfg.K);
  forward::SourceSpec src = unit_source(cfg.K);
  src.g = {1.0, 0.7, 0.4};
  const auto result = forward::simulate_ensemble(cfg, src, sys);
  for (int k = 0; k < cfg.K; ++k) {
    const double lam = sys.lambda(k);
    const double want = src.g[k] * src.g[k] * (1.0 - std::exp(-2.0 * lam)) / (2.0 * lam);
    CHECK(std::fabs(result.moments.variance[k] - want) <
          4.0 * result.moments.se_variance[k]);
    const double wantA = (1.0 - std::exp(-lam)) / lam;
    CHECK(std::fabs(result.moments.mean[k] - wantA) < 4.0 * result.moments.se_mean[k]);
  }
}

TEST_CASE("simulate_ensemble: T-scaling of the noise energy (f = 0)") {
  // sum_k E[u_k(T)^2] / T^{2(alpha+H-1)} stays bounded: fit the log-log slope
  forward::SimConfig cfg;
  cfg.alpha = 0.9;
  cfg.hurst = 0.7;
  cfg.n = 128;
  cfg.K = 4;
  cfg.paths = 4000;
  cfg.seed = 5;
  const auto sys = forward::build_eigensystem(Domain::interval(1.0), cfg.K);
  forward::SourceSpec src = unit_source(cfg.K);
  src.f.assign(cfg.K, 0.0);
  std::vector<double> Ts = {0.25, 0.5, 1.0}, energy;
  for (double T : Ts) {
    auto c = cfg;
    c.T = T;
    const auto res = forward::simulate_ensemble(c, src, sys);
    double e = 0.0;
    for (int k = 0; k < cfg.K; ++k)
      e += res.moments.variance[k] + res.moments.mean[k] * res.moments.mean[k];
    energy.push_back(e);
  }
  const double slope = std::log(energy[2] / energy[0]) / std::log(Ts[2] / Ts[0]);
  CHECK(std::fabs(slope - 2.0 * (cfg.alpha + cfg.hurst - 1.0)) < 0.3);
}

TEST_CASE("assemble_field: single modes, Parseval, and zero input") {
  const auto sys = forward::build_eigensystem(Domain::interval(1.0), 3);
  const std::vector<double> coeffs = {1.0, 0.0, 0.0};
  std::vector<double> xs;
  for (int i = 0; i <= 20; ++i) xs.push_back(i / 20.0);
  const auto field = forward::assemble_field(coeffs, xs, sys);
  for (std::size_t i = 0; i < xs.size(); ++i)
    CHECK(field[i] == doctest::Approx(std::sqrt(2.0) * std::sin(M_PI * xs[i])).epsilon(1e-12));

  const std::vector<double> zero = {0.0, 0.0, 0.0};
  for (double v : forward::assemble_field(zero, xs, sys)) CHECK(v == 0.0);

  // Parseval via Gauss quadrature
  const std::vector<double> c2 = {0.3, -1.1, 0.45};
  const auto& gl = quad::gl_rule(64);
  double acc = 0.0;
  for (std::size_t i = 0; i < gl.x.size(); ++i) {
    const double x = 0.5 * (gl.x[i] + 1.0);
    double u = 0.0;
    for (int k = 0; k < 3; ++k) u += c2[k] * sys.eval(k, x);
    acc += 0.5 * gl.w[i] * u * u;
  }
  const double want = c2[0] * c2[0] + c2[1] * c2[1] + c2[2] * c2[2];
  CHECK(std::fabs(acc - want) < 1e-8);
}

TEST_CASE("rectangle field assembly is orthonormal too") {
  const auto sys = forward::build_eigensystem(Domain::rectangle(1.0, 2.0), 3);
  const std::vector<double> coeffs = {0.5, 1.5, -2.0};
  const auto& gl = quad::gl_rule(32);
  double acc = 0.0;
  for (std::size_t i = 0; i < gl.x.size(); ++i)
    for (std::size_t j = 0; j < gl.x.size(); ++j) {
      const double x = 0.5 * (gl.x[i] + 1.0);
      const double y = 1.0 * (gl.x[j] + 1.0);
      double u = 0.0;
      for (int k = 0; k < 3; ++k) u += coeffs[k] * sys.eval(k, x, y);
      acc += 0.5 * gl.w[i] * 1.0 * gl.w[j] * u * u;
    }
  const double want = 0.25 + 2.25 + 4.0;
  CHECK(std::fabs(acc - want) < 1e-8);
}
