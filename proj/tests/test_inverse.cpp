#include "fracsource/inverse.hpp"

#include "fracsource/errors.hpp"
#include "fracsource/mlf.hpp"

#include <doctest.h>

#include <cmath>

using namespace fracsource;

namespace {

forward::TimeFunction const_h(double v) {
  forward::TimeFunction h;
  h.type = forward::TimeFunction::Type::Constant;
  h.value = v;
  h.lower_bound = v;
  return h;
}

forward::SimConfig base_config(double alpha, double hurst, int K) {
  forward::SimConfig cfg;
  cfg.alpha = alpha;
  cfg.hurst = hurst;
  cfg.K = K;
  cfg.paths = 16;
  return cfg;
}

// Exact moments from known sources: mean_k = f_k A_k, Cov_kl = g_k g_l B_kl.
forward::EnsembleMoments exact_moments(const inverse::InversionFactors& fac,
                                       const std::vector<double>& f,
                                       const std::vector<double>& g) {
  const int K = static_cast<int>(fac.A.size());
  forward::EnsembleMoments mom;
  mom.paths = 1;
  mom.covariance = Eigen::MatrixXd::Zero(K, K);
  mom.se_covariance = Eigen::MatrixXd::Zero(K, K);
  for (int k = 0; k < K; ++k) {
    mom.mean.push_back(f[k] * fac.A[k]);
    mom.se_mean.push_back(0.0);
    mom.se_variance.push_back(0.0);
  }
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) mom.covariance(k, l) = g[k] * g[l] * fac.B(k, l);
  for (int k = 0; k < K; ++k) mom.variance.push_back(mom.covariance(k, k));
  return mom;
}

} // namespace

TEST_CASE("compute_factors: alpha=1 closed form A and the C1 bound") {
  auto cfg = base_config(1.0, 0.6, 5);
  const auto sys = forward::build_eigensystem(forward::Domain::interval(1.0), cfg.K);
  const auto fac = inverse::compute_factors(cfg, sys, const_h(1.0));
  for (int k = 0; k < cfg.K; ++k) {
    const double lam = sys.lambda(k);
    CHECK(fac.A[k] == doctest::Approx((1.0 - std::exp(-lam)) / lam).epsilon(1e-9));
    CHECK(fac.A[k] >= fac.C1[k] * (1.0 - 1e-9));
    CHECK(fac.A[k] > 0.0);
  }
}

TEST_CASE("compute_factors: B positivity and the H>1/2 closed-form lower bound") {
  auto cfg = base_config(0.9, 0.75, 4);
  cfg.tol_moment = 1e-7;
  const auto sys = forward::build_eigensystem(forward::Domain::interval(1.0), cfg.K);
  const auto fac = inverse::compute_factors(cfg, sys, const_h(1.0));
  for (int k = 0; k < cfg.K; ++k)
    for (int l = 0; l < cfg.K; ++l) {
      CHECK(fac.B(k, l) > 0.0);
      CHECK(fac.B(k, l) == doctest::Approx(fac.B(l, k)).epsilon(1e-9));
      CHECK(fac.B(k, l) >= fac.C2(k, l) * (1.0 - 1e-9));
    }
}

TEST_CASE("compute_factors: strict positivity holds in the low-Hurst regime") {
  auto cfg = base_config(0.8, 0.35, 4);
  cfg.tol_moment = 1e-7;
  const auto sys = forward::build_eigensystem(forward::Domain::interval(1.0), cfg.K);
  const auto fac = inverse::compute_factors(cfg, sys, const_h(2.0));
  for (int k = 0; k < cfg.K; ++k)
    for (int l = 0; l < cfg.K; ++l) CHECK(fac.B(k, l) > 0.0);
  // amplification grows beyond the first mode
  for (int k = 1; k < cfg.K; ++k) {
    CHECK(1.0 / fac.A[k] >= 1.0 / fac.A[k - 1]);
    CHECK(1.0 / fac.B(k, k) >= 1.0 / fac.B(k - 1, k - 1));
  }
}

TEST_CASE("round trip: exact moments reproduce f and |g| to 1e-10") {
  auto cfg = base_config(0.8, 0.6, 6);
  cfg.tol_moment = 1e-8;
  const auto sys = forward::build_eigensystem(forward::Domain::interval(1.0), cfg.K);
  const auto fac = inverse::compute_factors(cfg, sys, const_h(1.0));
  const std::vector<double> f = {1.0, -0.7, 0.5, 0.0, 0.2, -0.1};
  const std::vector<double> g = {0.9, 0.6, -0.8, 0.3, -0.2, 0.15};
  const auto mom = exact_moments(fac, f, g);

  const auto fr = inverse::reconstruct_f(mom, fac, cfg.K);
  const auto gr = inverse::reconstruct_g_abs(mom, fac, cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    CHECK(std::fabs(fr.f_hat[k] - f[k]) <= 1e-10 * std::max(1.0, std::fabs(f[k])));
    CHECK(std::fabs(gr.g_abs[k] - std::fabs(g[k])) <= 1e-10 * std::fabs(g[k]));
  }
  CHECK(gr.clamped == 0);
  // sign pattern is consistent up to a global flip: products must match
  for (int k = 0; k < cfg.K; ++k)
    for (int l = 0; l < cfg.K; ++l) {
      const double want = (g[k] * g[l] >= 0.0) ? 1.0 : -1.0;
      CHECK(gr.signs[k] * gr.signs[l] == doctest::Approx(want));
    }
  CHECK(gr.offdiag_residual < 1e-10);
}

TEST_CASE("reconstruct_f: zero-mean data gives the zero source") {
  auto cfg = base_config(0.8, 0.6, 3);
  const auto sys = forward::build_eigensystem(forward::Domain::interval(1.0), cfg.K);
  const auto fac = inverse::compute_factors(cfg, sys, const_h(1.0));
  const auto mom = exact_moments(fac, {0.0, 0.0, 0.0}, {0.0, 0.0, 1.0});
  const auto fr = inverse::reconstruct_f(mom, fac, cfg.K);
  for (double v : fr.f_hat) CHECK(v == 0.0);
}

TEST_CASE("reconstruct_g_abs: negative variance artifacts are clamped and counted") {
  auto cfg = base_config(0.8, 0.6, 3);
  const auto sys = forward::build_eigensystem(forward::Domain::interval(1.0), cfg.K);
  const auto fac = inverse::compute_factors(cfg, sys, const_h(1.0));
  auto mom = exact_moments(fac, {1.0, 1.0, 1.0}, {1.0, 0.5, 0.25});
  mom.variance[1] = -1e-6; // sampling artifact
  const auto gr = inverse::reconstruct_g_abs(mom, fac, cfg.K);
  CHECK(gr.clamped == 1);
  CHECK(gr.g_abs[1] == 0.0);
  CHECK(gr.g_sq_raw[1] < 0.0);
}

TEST_CASE("beta_exponent: printed cases of the instability theorem") {
  CHECK(inverse::beta_exponent(0.75, 0.5, 0.5) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(inverse::beta_exponent(0.9, 0.75, 0.5) == doctest::Approx(0.65).epsilon(1e-14));
  CHECK(inverse::beta_exponent(0.9, 0.3, 0.8) == doctest::Approx(0.32).epsilon(1e-14));
  // the documented alternative reading of the 2H entry
  CHECK(inverse::beta_exponent(0.9, 0.3, 0.8, true) ==
        doctest::Approx(std::min({0.32, 3.12, 2.0 * 0.8 * 0.3, 0.8})).epsilon(1e-14));
  CHECK_THROWS_AS(inverse::beta_exponent(0.9, 0.3, 1.2), std::domain_error);
  CHECK_THROWS_AS(inverse::beta_exponent(0.4, 0.5, 0.5), std::domain_error);
  CHECK_THROWS_AS(inverse::beta_exponent(0.6, 0.3, 0.5), std::domain_error);
}

TEST_CASE("instability_report: closed-form A decay for alpha=1 and eps amplification") {
  auto cfg = base_config(1.0, 0.5, 10); // lambda_10/lambda_1 = 100 >= 50
  cfg.tol_moment = 1e-8;
  const auto sys = forward::build_eigensystem(forward::Domain::interval(1.0), cfg.K);
  const auto prof = inverse::instability_report(cfg, sys, const_h(1.0), 0.5);
  for (int k = 0; k < cfg.K; ++k) {
    const double lam = sys.lambda(k);
    CHECK(prof.A_lambda[k] == doctest::Approx(1.0 - std::exp(-lam)).epsilon(1e-8));
    CHECK(prof.A_lambda[k] <= 1.0 + 1e-12);
    CHECK(prof.t_star[k] == doctest::Approx(std::pow(lam, -0.5)).epsilon(1e-14));
  }
  CHECK(prof.slope_A <= 0.1);
  CHECK(prof.slope_B <= 0.1);
  // variance perturbation of eps maps to eps/B_kk in g_k^2, growing in k
  CHECK(prof.amplification.back() > prof.amplification.front());
  for (int k = 0; k < cfg.K; ++k)
    CHECK(prof.amplification[k] == doctest::Approx(prof.eps / prof.B_diag[k]));
}

TEST_CASE("instability_report: dynamic-range precondition") {
  auto cfg = base_config(1.0, 0.5, 3); // lambda_3/lambda_1 = 9 < 50
  const auto sys = forward::build_eigensystem(forward::Domain::interval(1.0), cfg.K);
  CHECK_THROWS_AS(inverse::instability_report(cfg, sys, const_h(1.0), 0.5),
                  std::invalid_argument);
}

TEST_CASE("B consistency via two routes for H > 1/2 (quadrature vs MC)") {
  auto cfg = base_config(0.85, 0.7, 2);
  cfg.n = 256;
  cfg.paths = 10000;
  cfg.seed = 3;
  cfg.tol_moment = 1e-7;
  const auto sys = forward::build_eigensystem(forward::Domain::interval(1.0), cfg.K);
  const auto fac = inverse::compute_factors(cfg, sys, const_h(1.0));

  const auto grid = fbm::TimeGrid::uniform(cfg.T, cfg.n);
  const auto bm = fbm::sample_bm_increments(grid, cfg.paths, cfg.seed);
  const auto p = fintegral::KernelParams::make(cfg.hurst, cfg.T);
  for (int k = 0; k < cfg.K; ++k) {
    const auto psi = fintegral::WeightedFunction::ml_kernel(cfg.alpha, sys.lambda(k), cfg.T);
    const auto samples = fintegral::integrate_pathwise(p, psi, bm);
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(samples.size() - 1);
    const double se = var * std::sqrt(2.0 / static_cast<double>(samples.size()));
    CHECK(std::fabs(var - fac.B(k, k)) < 3.0 * (se + cfg.tol_moment));
  }
}
