#include "fracsource/inverse.hpp"

#include "fracsource/errors.hpp"
#include "fracsource/mlf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fracsource::inverse {

namespace {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  return sxy / sxx;
}

} // namespace

InversionFactors compute_factors(const forward::SimConfig& config,
                                 const forward::EigenSystem& eig,
                                 const forward::TimeFunction& h) {
  config.validate();
  h.validate(config.T);
  const int K = config.K;
  if (eig.count() < K)
    throw std::invalid_argument("compute_factors: eigensystem smaller than K");

  InversionFactors fac;
  fac.alpha = config.alpha;
  fac.hurst = config.hurst;
  fac.T = config.T;
  fac.lambdas.assign(eig.lambdas.begin(), eig.lambdas.begin() + K);

  fac.A.resize(K);
  fac.C1.resize(K);
  for (int k = 0; k < K; ++k) {
    fac.A[k] = forward::ml_time_integral(config.alpha, eig.lambda(k), config.T, h);
    fac.C1[k] = h.lower_bound * std::pow(config.T, config.alpha) *
                mlf::ml_eval(config.alpha, config.alpha,
                             -eig.lambda(k) * std::pow(config.T, config.alpha));
    if (!(fac.A[k] > 0.0)) {
      std::ostringstream os;
      os << "compute_factors: non-positive A_" << (k + 1)
         << " contradicts the positivity bound; quadrature failure";
      throw numerical_error(os.str());
    }
  }

  const auto params = fintegral::KernelParams::make(config.hurst, config.T);
  std::vector<fintegral::WeightedFunction> kernels;
  kernels.reserve(K);
  for (int k = 0; k < K; ++k)
    kernels.push_back(
        fintegral::WeightedFunction::ml_kernel(config.alpha, eig.lambda(k), config.T));
  fac.B = fintegral::second_moment_matrix(params, kernels, config.tol_moment,
                                          config.threads);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l)
      if (!(fac.B(k, l) > 0.0)) {
        std::ostringstream os;
        os << "compute_factors: non-positive B_{" << (k + 1) << "," << (l + 1)
           << "} contradicts the positivity bound; quadrature failure";
        throw numerical_error(os.str());
      }

  if (config.hurst > 0.5) {
    const double aH = config.hurst * (2.0 * config.hurst - 1.0);
    const double Ta = std::pow(config.T, config.alpha);
    const double Tfac = std::pow(config.T, 2.0 * (config.alpha + config.hurst - 1.0));
    fac.C2.resize(K, K);
    for (int k = 0; k < K; ++k) {
      const double ek =
          mlf::ml_eval(config.alpha, config.alpha, -eig.lambda(k) * Ta);
      for (int l = 0; l < K; ++l) {
        const double el =
            mlf::ml_eval(config.alpha, config.alpha, -eig.lambda(l) * Ta);
        fac.C2(k, l) = aH * Tfac / (config.hurst * (2.0 * config.hurst - 1.0)) * ek * el;
      }
    }
  }
  return fac;
}

FReconstruction reconstruct_f(const forward::EnsembleMoments& moments,
                              const InversionFactors& factors, int k_cut) {
  const int K = static_cast<int>(factors.A.size());
  if (k_cut > K) throw std::invalid_argument("reconstruct_f: k_cut exceeds mode count");
  if (static_cast<int>(moments.mean.size()) < k_cut)
    throw std::invalid_argument("reconstruct_f: moments shorter than k_cut");
  FReconstruction rec;
  rec.k_cut = k_cut;
  rec.f_hat.assign(K, 0.0);
  for (int k = 0; k < k_cut; ++k) {
    if (!(std::fabs(factors.A[k]) > 1e-300))
      throw numerical_error("reconstruct_f: vanishing inversion factor A_k");
    rec.f_hat[k] = moments.mean[k] / factors.A[k];
  }
  return rec;
}

GReconstruction reconstruct_g_abs(const forward::EnsembleMoments& moments,
                                  const InversionFactors& factors, int k_cut) {
  const int K = static_cast<int>(factors.A.size());
  if (k_cut > K)
    throw std::invalid_argument("reconstruct_g_abs: k_cut exceeds mode count");
  if (static_cast<int>(moments.variance.size()) < k_cut)
    throw std::invalid_argument("reconstruct_g_abs: moments shorter than k_cut");
  GReconstruction rec;
  rec.k_cut = k_cut;
  rec.g_abs.assign(K, 0.0);
  rec.g_sq_raw.assign(K, 0.0);
  rec.signs.assign(K, 1);
  for (int k = 0; k < k_cut; ++k) {
    rec.g_sq_raw[k] = moments.variance[k] / factors.B(k, k);
    if (rec.g_sq_raw[k] < 0.0) ++rec.clamped;
    rec.g_abs[k] = std::sqrt(std::max(rec.g_sq_raw[k], 0.0));
  }

  // Best sign assignment anchored at the largest magnitude; only the products
  // s_k s_l are meaningful (the paper recovers |g|, not g).
  int anchor = 0;
  for (int k = 1; k < k_cut; ++k)
    if (rec.g_abs[k] > rec.g_abs[anchor]) anchor = k;
  const bool have_cov = moments.covariance.rows() >= k_cut;
  if (have_cov) {
    for (int k = 0; k < k_cut; ++k) {
      if (k == anchor) continue;
      rec.signs[k] = moments.covariance(anchor, k) >= 0.0 ? 1 : -1;
    }
    double res = 0.0;
    for (int k = 0; k < k_cut; ++k)
      for (int l = 0; l < k_cut; ++l) {
        if (k == l) continue;
        const double lhs = rec.signs[k] * rec.signs[l] * rec.g_abs[k] * rec.g_abs[l];
        const double rhs = moments.covariance(k, l) / factors.B(k, l);
        res = std::max(res, std::fabs(lhs - rhs));
      }
    rec.offdiag_residual = res;
  }
  return rec;
}

double beta_exponent(double alpha, double hurst, double gamma, bool use_2gamma_h) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::domain_error("beta_exponent: gamma must lie in (0,1)");
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::domain_error("beta_exponent: hurst must lie in (0,1)");
  if (hurst == 0.5) {
    if (!(alpha > 0.5))
      throw std::domain_error("beta_exponent: H = 1/2 case requires alpha > 1/2");
    return std::min(gamma * (2.0 * alpha - 1.0), 1.0 - gamma);
  }
  if (!(alpha + hurst > 1.0))
    throw std::domain_error("beta_exponent: requires alpha + H > 1 for H != 1/2");
  if (hurst < 0.5) {
    const double h_entry = use_2gamma_h ? 2.0 * gamma * hurst : 2.0 * hurst;
    return std::min({2.0 * gamma * (alpha + hurst - 1.0),
                     2.0 - 2.0 * gamma * (hurst - 1.0), h_entry, gamma});
  }
  return std::min({2.0 * gamma * (alpha + hurst - 1.0), 2.0 * (1.0 - gamma),
                   1.0 - gamma * (1.0 - alpha)});
}

InstabilityProfile instability_report(const forward::SimConfig& config,
                                      const forward::EigenSystem& eig,
                                      const forward::TimeFunction& h, double gamma,
                                      double eps, bool use_2gamma_h) {
  const int K = config.K;
  if (eig.count() < K)
    throw std::invalid_argument("instability_report: eigensystem smaller than K");
  if (!(eig.lambda(K - 1) / eig.lambda(0) >= 50.0))
    throw std::invalid_argument(
        "instability_report: need lambda_K / lambda_1 >= 50 for a visible decay range");

  const InversionFactors fac = compute_factors(config, eig, h);

  InstabilityProfile prof;
  prof.gamma = gamma;
  prof.beta = beta_exponent(config.alpha, config.hurst, gamma, use_2gamma_h);
  prof.eps = eps;
  prof.lambdas = fac.lambdas;
  prof.A = fac.A;
  prof.t_star.resize(K);
  prof.B_diag.resize(K);
  prof.A_lambda.resize(K);
  prof.B_lambda_beta.resize(K);
  prof.amplification.resize(K);
  for (int k = 0; k < K; ++k) {
    prof.t_star[k] = std::pow(fac.lambdas[k], -gamma);
    prof.B_diag[k] = fac.B(k, k);
    prof.A_lambda[k] = fac.A[k] * fac.lambdas[k];
    prof.B_lambda_beta[k] = fac.B(k, k) * std::pow(fac.lambdas[k], prof.beta);
    prof.amplification[k] = eps / fac.B(k, k);
  }
  prof.slope_A = loglog_slope(prof.lambdas, prof.A_lambda);
  prof.slope_B = loglog_slope(prof.lambdas, prof.B_lambda_beta);
  return prof;
}

} // namespace fracsource::inverse
