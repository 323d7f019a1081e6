#pragma once

#include "fracsource/fbm.hpp"

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace fracsource::fintegral {

// Kernel parameters for the Wiener-integral representation of fBm on [0,T].
// c_H is the regime normalizer, alpha_H = H(2H-1) (only used for H > 1/2).
struct KernelParams {
  double hurst = 0.5;
  double T = 1.0;
  double c_H = 1.0;
  double alpha_H = 0.0;

  enum class Regime { Low, Brownian, High };
  Regime regime() const {
    if (hurst == 0.5) return Regime::Brownian;
    return hurst < 0.5 ? Regime::Low : Regime::High;
  }

  static KernelParams make(double hurst, double T);
};

// psi(tau) = v^a * smooth(v) with v = T - tau the distance to the horizon;
// the endpoint power a is carried analytically so quadratures can integrate
// against the exact weight. psi vanishes for tau >= support_end.
struct WeightedFunction {
  double T = 1.0;
  double endpoint_exponent = 0.0;
  std::function<double(double)> smooth_of_distance; // S(v) on (0, T]
  double support_end = 1.0;                         // psi = 0 for tau >= support_end
  double scale = std::numeric_limits<double>::infinity(); // feature size of S near v=0

  double min_distance() const { return T - support_end; }
  double value_at_distance(double v) const {
    if (v <= min_distance()) return 0.0;
    const double s = smooth_of_distance ? smooth_of_distance(v) : 1.0;
    return endpoint_exponent == 0.0 ? s : std::pow(v, endpoint_exponent) * s;
  }
  double operator()(double tau) const { return value_at_distance(T - tau); }

  static WeightedFunction constant(double c, double T);
  static WeightedFunction indicator(double t, double T); // 1_{[0,t]}
  // (T-tau)^{alpha-1} E_{alpha,alpha}(-lambda (T-tau)^alpha)
  static WeightedFunction ml_kernel(double alpha, double lambda, double T);
};

// K_H(t,s) for 0 < s < t <= T (both Hurst regimes; identically 1 for H=1/2).
double kernel_KH(const KernelParams& p, double t, double s, double tol = 1e-9);

// Closed-form u-derivative of K_H(u,s); zero for H = 1/2. Carries the
// (H - 1/2) factor in the low regime, so it is negative there.
double kernel_KH_du(const KernelParams& p, double u, double s);

// (K*_{H,T} psi)(s) at a single point; v_s = T - s is passed in distance form
// by internal callers to stay accurate near the horizon.
double kstar_apply_at(const KernelParams& p, const WeightedFunction& psi,
                      double s, double tol = 1e-8, double* err_out = nullptr);

// Vectorized over an s-grid interior to (0,T); per-point error estimates are
// written to errs when provided. Points whose estimate exceeds 100x tol raise
// fracsource::numerical_error.
std::vector<double> kstar_apply(const KernelParams& p, const WeightedFunction& psi,
                                std::span<const double> s_grid, double tol = 1e-8,
                                std::vector<double>* errs = nullptr);

// One realization of int psi dB^H per path from Brownian increments on the
// matching grid: sum_i w_i DeltaW_i. Interior cells use the midpoint value of
// K*psi; cells hugging the endpoints use the per-cell L2 representative so the
// discrete variance matches ||K* psi||^2 even when alpha+H is close to 1.
std::vector<double> integrate_pathwise(const KernelParams& p, const WeightedFunction& psi,
                                       const fbm::PathBatch& increments, int threads = 0);

// E[ int psi dB^H * int phi dB^H ] by deterministic quadrature:
// H > 1/2 uses the |r-u|^{2H-2} double integral, H < 1/2 the K* inner product,
// H = 1/2 the plain L2 product.
double second_moment_pair(const KernelParams& p, const WeightedFunction& psi,
                          const WeightedFunction& phi, double tol = 1e-6);

// Full Gram matrix E[int psi_k dB^H int psi_l dB^H] over a family of kernels,
// sharing quadrature grids across pairs.
Eigen::MatrixXd second_moment_matrix(const KernelParams& p,
                                     const std::vector<WeightedFunction>& modes,
                                     double tol = 1e-6, int threads = 0);

// Fits the small-t growth exponent of E|int_0^t phi dB^H|^2: least-squares
// slope of log moment against log t. Requires alpha + H > 1.
double scaling_exponent_check(double alpha, double hurst, double lambda,
                              std::span<const double> t_list);

} // namespace fracsource::fintegral
