#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace fracsource::quad {

// Banded quadrature for integrands with one algebraic endpoint singularity.
//
// The integrand is always supplied in distance coordinates: g(v) is the value
// at distance v from the singular endpoint, so v never suffers cancellation.
// Bands are graded geometrically (ratio 2) toward v = 0; each band uses a
// fixed Gauss-Legendre rule with a lower-order companion as error estimate,
// and the terminal [0, h0) stub is integrated by a product rule against the
// declared weight v^q.

struct Options {
  double abs_tol = 1e-9;
  // When positive, refinement also stops once the error estimate drops below
  // rel_tol * |integral|; lets callers with widely varying magnitudes avoid
  // over-resolving large values.
  double rel_tol = 0.0;
  double finest_rel = 1e-6;  // first band width relative to span
  // Feature size of g near v = 0 (e.g. lambda^{-1/alpha} for relaxation
  // kernels); the first band is pushed below it.
  double scale_hint = std::numeric_limits<double>::infinity();
  int max_refine = 4000;
};

struct Result {
  double value = 0.0;
  double err = 0.0;
  std::size_t evals = 0;
};

// integral_0^span g(v) dv with g ~ C v^q as v -> 0+ (q > -1), smooth elsewhere.
Result power_edge(const std::function<double(double)>& g, double span, double q,
                  const Options& opt = {});

// integral_a^b f(u) du with f ~ Ca (u-a)^{qa} near a and f ~ Cb (b-u)^{qb}
// near b. ga(v) = f(a+v), gb(v) = f(b-v); the interval is split at midpoint.
Result both_edges(const std::function<double(double)>& ga,
                  const std::function<double(double)>& gb, double span,
                  double qa, double qb, const Options& opt_a = {},
                  const Options& opt_b = {});

// Gauss-Legendre rule on [-1,1]; cached, thread-safe. Supported orders are
// computed on demand by Newton iteration on the Legendre polynomial.
struct GLRule {
  std::vector<double> x, w;
};
const GLRule& gl_rule(int n);

// Nodes/weights (distance coordinates) of a fixed graded composite rule on
// (h0, span]: ratio-2 bands toward 0, gl_order points per band. The [0,h0)
// stub is not covered; choose h0 so its mass is negligible.
struct CompositeRule {
  std::vector<double> nodes, weights;
};
CompositeRule graded_rule(double span, double h0, int gl_order);

} // namespace fracsource::quad
