#include "fracsource/mlf.hpp"

#include "fracsource/errors.hpp"
#include "ml_oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace fracsource;

namespace {

double rel_err(double got, double want) {
  return std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
}

// Centered finite difference with relative step.
template <typename F>
double fd_derivative(F&& f, double t, double h) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

} // namespace

TEST_CASE("gamma_fn classical values") {
  CHECK(rel_err(mlf::gamma_fn(1.0), 1.0) < 1e-13);
  CHECK(rel_err(mlf::gamma_fn(0.5), std::sqrt(M_PI)) < 1e-13);
  CHECK(rel_err(mlf::gamma_fn(4.0), 6.0) < 1e-13);
  CHECK(rel_err(mlf::gamma_fn(10.5), 1133278.3889487855673345) < 1e-13);
  // negative non-integer via reflection
  CHECK(rel_err(mlf::gamma_fn(-0.5), -2.0 * std::sqrt(M_PI)) < 1e-13);
}

TEST_CASE("gamma_fn pole arguments raise") {
  CHECK_THROWS_AS(mlf::gamma_fn(0.0), std::domain_error);
  CHECK_THROWS_AS(mlf::gamma_fn(-1.0), std::domain_error);
  CHECK_THROWS_AS(mlf::gamma_fn(-7.0), std::domain_error);
  CHECK(mlf::reciprocal_gamma(-3.0) == 0.0);
}

TEST_CASE("gamma_fn agrees with lgamma across a range") {
  for (double x = 0.05; x < 30.0; x += 0.173) {
    const double want = std::exp(std::lgamma(x));
    CHECK(rel_err(mlf::gamma_fn(x), want) < 2e-13);
  }
}

TEST_CASE("ml_eval spec examples") {
  CHECK(rel_err(mlf::ml_eval(1.0, 1.0, -1.0), std::exp(-1.0)) < 1e-13);
  // x = 0 leaves only the k = 0 term
  CHECK(rel_err(mlf::ml_eval(0.4, 0.9, 0.0), mlf::reciprocal_gamma(0.9)) < 1e-13);
  CHECK(rel_err(mlf::ml_eval(0.7, 2.3, 0.0), mlf::reciprocal_gamma(2.3)) < 1e-13);
  // frozen from the extended-precision series oracle
  const double e_half = 0.13660600739194928253732910707025740502389;
  CHECK(rel_err(mlf::ml_eval(0.5, 0.5, -1.0), e_half) < 1e-11);
  CHECK(rel_err(mlf::ml_eval(0.5, 0.5, -1.0), oracle::ml_reference(0.5, 0.5, -1.0)) < 1e-11);
}

TEST_CASE("ml_eval domain errors") {
  CHECK_THROWS_AS(mlf::ml_eval(0.0, 1.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(mlf::ml_eval(2.0, 1.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(mlf::ml_eval(-0.3, 1.0, -1.0), std::domain_error);
}

TEST_CASE("ml_eval matches the oracle on a sampled sweep") {
  for (double alpha : {0.3, 0.55, 0.8, 1.0}) {
    for (double beta : {0.3, 0.8, 1.0}) {
      for (int i = 0; i <= 24; ++i) {
        const double x = -50.0 * i / 24.0;
        const double got = mlf::ml_eval(alpha, beta, x);
        const double want = oracle::ml_reference(alpha, beta, x);
        CAPTURE(alpha);
        CAPTURE(beta);
        CAPTURE(x);
        CHECK(rel_err(got, want) < 1e-10);
      }
    }
  }
}

TEST_CASE("exponential reduction to 1e-12 on [-30, 0]") {
  for (int i = 0; i <= 120; ++i) {
    const double x = -30.0 * i / 120.0;
    CHECK(rel_err(mlf::ml_eval(1.0, 1.0, x), std::exp(x)) < 1e-12);
  }
}

TEST_CASE("decay bound: |E|(1+x) stays bounded out to 1e4") {
  for (double alpha : {0.3, 0.5, 0.8, 1.0}) {
    for (double beta : {0.5, 0.8, 1.0}) {
      if (alpha == 1.0 && beta == 1.0) continue; // exponential: bound trivial
      double head_max = 0.0;
      std::vector<double> xs;
      for (int i = 0; i <= 100; ++i) xs.push_back(10.0 * i / 100.0);
      for (int i = 1; i <= 120; ++i) xs.push_back(10.0 * std::pow(10.0, 3.0 * i / 120.0));
      for (double x : xs) {
        const double r = std::fabs(mlf::ml_eval(alpha, beta, -x)) * (1.0 + x);
        if (x <= 10.0) head_max = std::max(head_max, r);
      }
      const double cap = 1.2 * head_max;
      for (double x : xs) {
        const double r = std::fabs(mlf::ml_eval(alpha, beta, -x)) * (1.0 + x);
        CAPTURE(alpha);
        CAPTURE(beta);
        CAPTURE(x);
        CHECK(r <= cap);
      }
    }
  }
}

TEST_CASE("complete monotonicity of E_{alpha,1} on a log grid") {
  for (double alpha : {0.3, 0.6, 0.9}) {
    std::vector<double> xs, vs;
    for (int i = 0; i <= 90; ++i) {
      xs.push_back(std::pow(10.0, -3.0 + 6.0 * i / 90.0));
      vs.push_back(mlf::ml_eval(alpha, 1.0, -xs.back()));
    }
    for (std::size_t i = 0; i < vs.size(); ++i) CHECK(vs[i] >= 0.0);
    // divided differences: first <= 0, second >= 0 (any grid)
    for (std::size_t i = 0; i + 1 < vs.size(); ++i) {
      const double d1 = (vs[i + 1] - vs[i]) / (xs[i + 1] - xs[i]);
      CHECK(d1 <= 1e-12);
    }
    for (std::size_t i = 0; i + 2 < vs.size(); ++i) {
      const double d1 = (vs[i + 1] - vs[i]) / (xs[i + 1] - xs[i]);
      const double d2 = (vs[i + 2] - vs[i + 1]) / (xs[i + 2] - xs[i + 1]);
      CHECK((d2 - d1) / (xs[i + 2] - xs[i]) >= -1e-12);
    }
  }
}

TEST_CASE("ml_phi positivity, reduction, and monotone decrease") {
  CHECK(rel_err(mlf::ml_phi(1.0, 2.0, 0.5), std::exp(-1.0)) < 1e-13);
  const double want = oracle::ml_reference(0.75, 0.75, -1.0);
  CHECK(rel_err(mlf::ml_phi(0.75, 1.0, 1.0), want) < 1e-10);
  // frozen oracle value for the same point
  CHECK(rel_err(mlf::ml_phi(0.75, 1.0, 1.0), 0.23223772010096143194420358374) < 1e-10);

  for (double alpha : {0.4, 0.7, 1.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 200; ++i) {
      const double t = 3.0 * i / 200.0;
      const double v = mlf::ml_phi(alpha, 5.0, t);
      CHECK(v > 0.0);
      CHECK(v <= prev * (1.0 + 1e-11));
      prev = v;
    }
  }
}

TEST_CASE("ml_phi domain errors") {
  CHECK_THROWS_AS(mlf::ml_phi(0.8, 1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(mlf::ml_phi(0.8, 1.0, -0.1), std::domain_error);
  CHECK_THROWS_AS(mlf::ml_phi(0.8, -1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(mlf::ml_phi_derivative(0.8, 1.0, 0.0), std::domain_error);
}

TEST_CASE("derivative identity of E_{alpha,1} (chain rule through ml_phi)") {
  // d/dt E_{alpha,1}(-lambda t^alpha) = -lambda ml_phi(alpha, lambda, t)
  for (double alpha : {0.5, 0.8, 1.0}) {
    for (double lambda : {0.7, 3.0}) {
      for (double t : {0.3, 0.9, 1.7}) {
        const double h = 1e-6 * t;
        const double fd = fd_derivative(
            [&](double u) { return mlf::ml_eval(alpha, 1.0, -lambda * std::pow(u, alpha)); },
            t, h);
        const double want = -lambda * mlf::ml_phi(alpha, lambda, t);
        CHECK(rel_err(fd, want) < 1e-5);
      }
    }
  }
}

TEST_CASE("ml_phi_derivative matches finite differences and the sign law") {
  CHECK(rel_err(mlf::ml_phi_derivative(1.0, 1.0, 1.0), -std::exp(-1.0)) < 1e-12);
  for (double alpha : {0.6, 0.8}) {
    for (double lambda : {1.0, 3.0}) {
      for (double t : {0.4, 0.7, 2.0}) {
        const double h = 1e-6 * t;
        const double fd =
            fd_derivative([&](double u) { return mlf::ml_phi(alpha, lambda, u); }, t, h);
        const double got = mlf::ml_phi_derivative(alpha, lambda, t);
        CHECK(rel_err(got, fd) < 1e-5);
        CHECK(got < 0.0); // monotone decrease forces the sign
      }
    }
  }
}
