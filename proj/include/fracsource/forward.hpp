#pragma once

#include "fracsource/fbm.hpp"
#include "fracsource/fintegral.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace fracsource::forward {

struct Domain {
  enum class Type { Interval, Rectangle };
  Type type = Type::Interval;
  double L = 1.0;        // interval length
  double Lx = 1.0, Ly = 1.0;

  static Domain interval(double L);
  static Domain rectangle(double Lx, double Ly);
};

// Dirichlet eigensystem of -Laplace on the domain, sorted by eigenvalue
// (ties broken by mode index). Eigenfunctions are L2-orthonormal.
struct EigenSystem {
  Domain domain;
  std::vector<double> lambdas;
  std::vector<std::array<int, 2>> modes; // interval {k,0}; rectangle {m,n}

  int count() const { return static_cast<int>(lambdas.size()); }
  double lambda(int k) const { return lambdas.at(k); }
  double eval(int k, double x) const;
  double eval(int k, double x, double y) const;
};

EigenSystem build_eigensystem(const Domain& domain, int K);

// Time factor h(t) with a certified positive lower bound c_h.
struct TimeFunction {
  enum class Type { Constant, Samples, SinOffset };
  Type type = Type::Constant;
  double value = 1.0;                    // Constant
  std::vector<double> times, values;     // Samples (linear interpolation)
  double offset = 1.0, amplitude = 0.0, frequency = 1.0; // offset + amplitude sin(freq t)
  double lower_bound = 1.0;              // c_h

  double operator()(double t) const;
  // Checks c_h > 0 and h >= c_h on a sampling of [0,T].
  void validate(double T) const;
};

struct SourceSpec {
  std::vector<double> f, g; // coefficient vectors, padded with zeros past size
  TimeFunction h;

  double f_coeff(int k) const { return k < static_cast<int>(f.size()) ? f[k] : 0.0; }
  double g_coeff(int k) const { return k < static_cast<int>(g.size()) ? g[k] : 0.0; }
  void validate(double T) const; // g != 0 and h per Assumption
};

struct SimConfig {
  double alpha = 0.8;
  double hurst = 0.6;
  double T = 1.0;
  int n = 512;       // time grid cells
  int K = 8;         // spectral modes
  std::size_t paths = 10000;
  std::uint64_t seed = 1;
  int threads = 0;
  double tol_moment = 1e-6;
  double tol_kstar = 1e-8;

  void validate() const; // throws config_error; alpha+H>1 is the standing hypothesis
};

struct EnsembleMoments {
  std::vector<double> mean, se_mean, variance, se_variance;
  Eigen::MatrixXd covariance, se_covariance;
  std::size_t paths = 0;
};

// The h-weighted relaxation integral
//   int_0^t (t-tau)^{alpha-1} E_{alpha,alpha}(-lambda (t-tau)^alpha) h(tau) dtau
// evaluated through the w = (t-tau)^alpha substitution (weight removed exactly).
double ml_time_integral(double alpha, double lambda, double t, const TimeFunction& h,
                        double tol = 1e-12);

// I_{k,1}(t) = f_k * ml_time_integral(...)
double deterministic_coefficient(int k, double t, const SimConfig& config,
                                 const SourceSpec& source, const EigenSystem& eig);

// One sample of I_{k,2}(T, omega) per path; all modes must share the same
// Brownian batch (the equation carries a single scalar noise).
std::vector<double> stochastic_coefficient_samples(int k, const SimConfig& config,
                                                   const SourceSpec& source,
                                                   const EigenSystem& eig,
                                                   const fbm::PathBatch& bm);

struct EnsembleResult {
  Eigen::MatrixXd samples; // paths x modes
  EnsembleMoments moments;
};

EnsembleResult simulate_ensemble(const SimConfig& config, const SourceSpec& source,
                                 const EigenSystem& eig);

std::vector<double> assemble_field(std::span<const double> coeffs,
                                   std::span<const double> x_grid, const EigenSystem& eig);

// Rectangle domains: row-major field over the tensor grid.
std::vector<double> assemble_field_2d(std::span<const double> coeffs,
                                      std::span<const double> x_grid,
                                      std::span<const double> y_grid,
                                      const EigenSystem& eig);

} // namespace fracsource::forward
