#pragma once

#include "fracsource/forward.hpp"

#include <Eigen/Dense>

#include <vector>

namespace fracsource::inverse {

// Deterministic multipliers relating data moments to source coefficients:
//   E(u_k(T))       = f_k A_k
//   Cov(u_k, u_l)   = g_k g_l B_kl
// plus the paper-side lower bounds used as positivity certificates.
struct InversionFactors {
  double alpha = 0.0, hurst = 0.0, T = 0.0;
  std::vector<double> lambdas;
  std::vector<double> A;
  Eigen::MatrixXd B;
  std::vector<double> C1;  // c_h T^alpha E_{alpha,alpha}(-lambda_k T^alpha)
  Eigen::MatrixXd C2;      // closed-form bound, H > 1/2 only (else 0x0)
};

InversionFactors compute_factors(const forward::SimConfig& config,
                                 const forward::EigenSystem& eig,
                                 const forward::TimeFunction& h);

struct FReconstruction {
  std::vector<double> f_hat;
  int k_cut = 0;
};

FReconstruction reconstruct_f(const forward::EnsembleMoments& moments,
                              const InversionFactors& factors, int k_cut);

struct GReconstruction {
  std::vector<double> g_abs;
  std::vector<double> g_sq_raw;  // variance_k / B_kk before the zero clamp
  std::vector<int> signs;        // best sign assignment (sign of g not claimed)
  int clamped = 0;
  double offdiag_residual = 0.0; // max_{k!=l} | s_k s_l |g_k||g_l| - Cov_kl/B_kl |
  int k_cut = 0;
};

GReconstruction reconstruct_g_abs(const forward::EnsembleMoments& moments,
                                  const InversionFactors& factors, int k_cut);

// Decay exponent of the variance data under the t* = lambda^{-gamma} split.
// use_2gamma_h swaps the printed 2H entry of the low-Hurst minimum for
// 2 gamma H (the exponent the t*-substitution itself produces).
double beta_exponent(double alpha, double hurst, double gamma, bool use_2gamma_h = false);

struct InstabilityProfile {
  double gamma = 0.0, beta = 0.0;
  std::vector<double> lambdas, t_star;
  std::vector<double> A, B_diag;
  std::vector<double> A_lambda;        // A_k lambda_k, bounded per the decay estimate
  std::vector<double> B_lambda_beta;   // B_kk lambda_k^beta
  double slope_A = 0.0, slope_B = 0.0; // log-log least-squares trends
  double eps = 0.0;
  std::vector<double> amplification;   // eps / B_kk: error in g_k^2 per eps of variance
};

InstabilityProfile instability_report(const forward::SimConfig& config,
                                      const forward::EigenSystem& eig,
                                      const forward::TimeFunction& h, double gamma,
                                      double eps = 1e-3, bool use_2gamma_h = false);

} // namespace fracsource::inverse
