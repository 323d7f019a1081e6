#pragma once

#include <string>

namespace fracsource::mlf {

// Query for the two-parameter Mittag-Leffler function E_{alpha,beta}(x).
// The toolkit only needs the negative real axis (x <= 0) plus small |x|;
// alpha is accepted on (0,2), the solver layers restrict it to (0,1].
struct MLQuery {
  double alpha;
  double beta;
  double x;
};

// Gamma function via Lanczos approximation with reflection.
// Throws std::domain_error at the poles (x in {0,-1,-2,...}).
double gamma_fn(double x);

// 1/Gamma(x); returns exactly 0 at the poles.
double reciprocal_gamma(double x);

// E_{alpha,beta}(x). Relative accuracy target 1e-11 on x in [-1e6, 0];
// throws std::domain_error for alpha outside (0,2) and
// fracsource::numerical_error if no evaluation path reaches the target.
double ml_eval(const MLQuery& q);
double ml_eval(double alpha, double beta, double x);

// Relaxation kernel t^{alpha-1} E_{alpha,alpha}(-lambda t^alpha), t > 0.
// Strictly positive; diverges as t -> 0+ for alpha < 1.
double ml_phi(double alpha, double lambda, double t);

// d/dt of ml_phi: t^{alpha-2} E_{alpha,alpha-1}(-lambda t^alpha), t > 0.
double ml_phi_derivative(double alpha, double lambda, double t);

} // namespace fracsource::mlf
