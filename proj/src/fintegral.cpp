#include "fracsource/fintegral.hpp"

#include "fracsource/errors.hpp"
#include "fracsource/mlf.hpp"
#include "fracsource/quad.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace fracsource::fintegral {

namespace {

using quad::Options;
using quad::Result;

double beta_fn(double a, double b) {
  return mlf::gamma_fn(a) * mlf::gamma_fn(b) / mlf::gamma_fn(a + b);
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

template <typename Fn>
void parallel_index(std::size_t count, int threads, Fn&& fn) {
  const int nt = static_cast<int>(std::min<std::size_t>(resolve_threads(threads),
                                                        std::max<std::size_t>(count, 1)));
  if (nt <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([=, &fn]() {
      for (std::size_t i = t; i < count; i += nt) fn(i);
    });
  for (auto& th : pool) th.join();
}

Options edge_opts(double tol, double scale) {
  Options o;
  o.abs_tol = tol;
  o.scale_hint = scale;
  return o;
}

Options edge_opts_rel(double tol, double rel, double scale) {
  Options o;
  o.abs_tol = tol;
  o.rel_tol = rel;
  o.scale_hint = scale;
  return o;
}

// K_H(s + span, s) with the (t - s) distance passed exactly. The kernel blows
// up like s^{-|H-1/2|} as s -> 0, so the inner quadrature works to a relative
// target alongside the absolute one.
double kernel_KH_core(const KernelParams& p, double span, double s, double tol) {
  const double H = p.hurst;
  if (p.regime() == KernelParams::Regime::Brownian) return 1.0;
  const double rel = std::max(tol, 1e-11);
  if (p.regime() == KernelParams::Regime::High) {
    const auto g = [&](double y) {
      return std::pow((s + y) / s, H - 0.5) * std::pow(y, H - 1.5);
    };
    const Result r =
        quad::power_edge(g, span, H - 1.5, edge_opts_rel(tol / p.c_H, rel, s));
    return p.c_H * r.value;
  }
  // Low regime (KH012): closed first term plus a mildly singular integral.
  const double t = s + span;
  const double term1 = std::pow(t / s, H - 0.5) * std::pow(span, H - 0.5);
  const auto g = [&](double y) {
    return std::pow(s + y, H - 1.5) * std::pow(y, H - 0.5);
  };
  const Result r =
      quad::power_edge(g, span, H - 0.5, edge_opts_rel(tol / p.c_H, rel, s));
  return p.c_H * (term1 - (H - 0.5) * std::pow(s, 0.5 - H) * r.value);
}

// (K* psi)(s) with both s and v_s = T - s supplied exactly by the caller.
double kstar_core(const KernelParams& p, const WeightedFunction& psi, double s,
                  double v_s, double tol, double* err_out, double kh_hint) {
  const double H = p.hurst;
  const double T = p.T;
  if (err_out) *err_out = 0.0;
  if (p.regime() == KernelParams::Regime::Brownian) return psi.value_at_distance(v_s);

  const double piece_rel = 1e-8; // transfer values only enter multiplicatively
  const double x_min = psi.min_distance();
  if (p.regime() == KernelParams::Regime::High) {
    if (x_min >= v_s) return 0.0;
    const double span = v_s - x_min;
    const double pref = p.c_H;
    const auto ga = [&](double y) {
      const double x = x_min + y;
      return psi.value_at_distance(x) * std::pow((T - x) / s, H - 0.5) *
             std::pow(span - y, H - 1.5);
    };
    const auto gb = [&](double y) {
      const double x = v_s - y;
      return psi.value_at_distance(x) * std::pow((s + y) / s, H - 0.5) *
             std::pow(y, H - 1.5);
    };
    const double qa = (x_min == 0.0) ? psi.endpoint_exponent : 0.0;
    const Result r = quad::both_edges(ga, gb, span, qa, H - 1.5,
                                      edge_opts_rel(tol / pref, piece_rel, psi.scale),
                                      edge_opts_rel(tol / pref, piece_rel, s));
    if (err_out) *err_out = pref * r.err;
    return pref * r.value;
  }

  // Low regime: K_H(T,s) psi(s) + integral of the difference term.
  const double psi_s = psi.value_at_distance(v_s);
  const double kh = std::isnan(kh_hint) ? kernel_KH_core(p, v_s, s, tol) : kh_hint;
  const double pref = p.c_H * (H - 0.5);
  const auto dk = [&](double x, double dist_to_vs) {
    // dist_to_vs = v_s - x, exact in the caller's coordinates
    return std::pow((T - x) / s, H - 0.5) * std::pow(dist_to_vs, H - 1.5);
  };

  double d_total = 0.0, d_err = 0.0;
  if (x_min > 0.0 && x_min < v_s) {
    // (x_min, v_s): difference form; (0, x_min): psi vanishes there.
    const double span = v_s - x_min;
    const auto ga = [&](double y) {
      const double x = x_min + y;
      return (psi.value_at_distance(x) - psi_s) * dk(x, span - y);
    };
    const auto gb = [&](double y) {
      const double x = v_s - y;
      return (psi.value_at_distance(x) - psi_s) * dk(x, y);
    };
    const Result r1 = quad::both_edges(ga, gb, span, 0.0, H - 0.5,
                                       edge_opts_rel(0.4 * tol / std::fabs(pref),
                                                     piece_rel, psi.scale),
                                       edge_opts_rel(0.4 * tol / std::fabs(pref),
                                                     piece_rel, std::min(s, psi.scale)));
    const auto g0 = [&](double y) { return -psi_s * dk(y, v_s - y); };
    const Result r2 = quad::power_edge(g0, x_min, 0.0,
                                       edge_opts_rel(0.1 * tol / std::fabs(pref),
                                                     piece_rel, x_min));
    d_total = r1.value + r2.value;
    d_err = r1.err + r2.err;
  } else if (x_min >= v_s) {
    // psi vanishes on (s, T): only the -psi_s tail survives, and psi_s = 0.
    d_total = 0.0;
  } else {
    const double span = v_s;
    const auto ga = [&](double y) {
      return (psi.value_at_distance(y) - psi_s) * dk(y, span - y);
    };
    const auto gb = [&](double y) {
      const double x = v_s - y;
      return (psi.value_at_distance(x) - psi_s) * dk(x, y);
    };
    const double qa = std::min(psi.endpoint_exponent, 0.0);
    const Result r = quad::both_edges(ga, gb, span, qa, H - 0.5,
                                      edge_opts_rel(0.5 * tol / std::fabs(pref),
                                                    piece_rel, psi.scale),
                                      edge_opts_rel(0.5 * tol / std::fabs(pref),
                                                    piece_rel, std::min(s, psi.scale)));
    d_total = r.value;
    d_err = r.err;
  }
  if (err_out) *err_out = std::fabs(pref) * d_err;
  return kh * psi_s + pref * d_total;
}

// Inner integral of the H > 1/2 double-integral route:
//   I_phi(r) = int_0^{r - xmin} phi(r - v) v^{2H-2} dv  (distance coordinates).
double v121_inner(const KernelParams& p, const WeightedFunction& phi, double r,
                  double tol, double* err_out) {
  const double H = p.hurst;
  const double x_min = phi.min_distance();
  if (err_out) *err_out = 0.0;
  if (r <= x_min) return 0.0;
  const double span = r - x_min;
  const auto ga = [&](double v) {
    return phi.value_at_distance(r - v) * std::pow(v, 2.0 * H - 2.0);
  };
  const auto gb = [&](double y) {
    // v = span - y, phi argument x = r - v = x_min + y
    return phi.value_at_distance(x_min + y) * std::pow(span - y, 2.0 * H - 2.0);
  };
  const double qb = (x_min == 0.0) ? phi.endpoint_exponent : 0.0;
  const Result res = quad::both_edges(ga, gb, span, 2.0 * H - 2.0, qb,
                                      edge_opts(0.5 * tol, 0.3 * r),
                                      edge_opts(0.5 * tol, phi.scale));
  if (err_out) *err_out = res.err;
  return res.value;
}

// One triangle of the V121 double integral.
double v121_half(const KernelParams& p, const WeightedFunction& psi,
                 const WeightedFunction& phi, double tol, double* err_out) {
  const double T = p.T;
  const double x_min = psi.min_distance();
  const double span = T - x_min;
  const double inner_tol = std::max(1e-13, 2e-3 * tol);
  const auto F = [&](double r) {
    return psi.value_at_distance(r) * v121_inner(p, phi, r, inner_tol, nullptr);
  };
  const auto ga = [&](double y) { return F(x_min + y); };
  const auto gb = [&](double y) { return F(T - y); };
  const double qa = (x_min == 0.0)
                        ? psi.endpoint_exponent + phi.endpoint_exponent + 2.0 * p.hurst - 1.0
                        : 0.0;
  const double scale_lo = std::min(psi.scale, phi.scale);
  const Result res = quad::both_edges(ga, gb, span, qa, 0.0,
                                      edge_opts(0.5 * tol, scale_lo),
                                      edge_opts(0.5 * tol,
                                                std::numeric_limits<double>::infinity()));
  if (err_out) *err_out = res.err;
  return res.value;
}

// Outer integrand of the H <= 1/2 routes at a point given by (s, v_s).
double gram_point(const KernelParams& p, const WeightedFunction& psi,
                  const WeightedFunction& phi, double s, double v_s, double kstar_tol,
                  double kh) {
  if (p.regime() == KernelParams::Regime::Brownian)
    return psi.value_at_distance(v_s) * phi.value_at_distance(v_s);
  const double a = kstar_core(p, psi, s, v_s, kstar_tol, nullptr, kh);
  const double b = (&psi == &phi) ? a : kstar_core(p, phi, s, v_s, kstar_tol, nullptr, kh);
  return a * b;
}

struct GradedSide {
  std::vector<double> nodes;   // distance from the graded end
  std::vector<double> weights;
};

// Ratio-2 banded composite Gauss rule on (h0, span], h0 from the stub-mass
// bound h0^{q+1} <= frac * tol (the dropped stub).
GradedSide graded_side(double span, double q, double tol, double scale, int gl_order) {
  double h0 = span * 1e-6;
  if (std::isfinite(scale) && scale > 0.0) h0 = std::min(h0, 1e-3 * scale);
  if (q + 1.0 < 1.5) {
    const double target = std::pow(0.02 * tol, 1.0 / (q + 1.0));
    h0 = std::min(h0, std::max(target, span * 1e-260));
  }
  h0 = std::max(h0, span * 1e-260);
  quad::CompositeRule r = quad::graded_rule(span, h0, gl_order);
  return {std::move(r.nodes), std::move(r.weights)};
}

} // namespace

KernelParams KernelParams::make(double hurst, double T) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::domain_error("KernelParams: hurst must lie in (0,1)");
  if (!(T > 0.0)) throw std::domain_error("KernelParams: T must be positive");
  KernelParams p;
  p.hurst = hurst;
  p.T = T;
  if (hurst > 0.5) {
    p.alpha_H = hurst * (2.0 * hurst - 1.0);
    p.c_H = std::sqrt(p.alpha_H / beta_fn(2.0 - 2.0 * hurst, hurst - 0.5));
  } else if (hurst < 0.5) {
    p.alpha_H = hurst * (2.0 * hurst - 1.0);
    p.c_H = std::sqrt(2.0 * hurst /
                      ((1.0 - 2.0 * hurst) * beta_fn(1.0 - 2.0 * hurst, hurst + 0.5)));
  } else {
    p.alpha_H = 0.0;
    p.c_H = 1.0;
  }
  return p;
}

WeightedFunction WeightedFunction::constant(double c, double T) {
  WeightedFunction w;
  w.T = T;
  w.endpoint_exponent = 0.0;
  w.smooth_of_distance = [c](double) { return c; };
  w.support_end = T;
  return w;
}

WeightedFunction WeightedFunction::indicator(double t, double T) {
  WeightedFunction w;
  w.T = T;
  w.endpoint_exponent = 0.0;
  w.smooth_of_distance = [](double) { return 1.0; };
  w.support_end = t;
  return w;
}

WeightedFunction WeightedFunction::ml_kernel(double alpha, double lambda, double T) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::domain_error("ml_kernel: alpha must lie in (0,1]");
  if (!(lambda > 0.0)) throw std::domain_error("ml_kernel: lambda must be positive");
  WeightedFunction w;
  w.T = T;
  w.endpoint_exponent = alpha - 1.0;
  w.smooth_of_distance = [alpha, lambda](double v) {
    return mlf::ml_eval(alpha, alpha, -lambda * std::pow(v, alpha));
  };
  w.support_end = T;
  w.scale = std::pow(lambda, -1.0 / alpha);
  return w;
}

double kernel_KH(const KernelParams& p, double t, double s, double tol) {
  if (!(s > 0.0 && s < t && t <= p.T * (1.0 + 1e-12)))
    throw std::domain_error("kernel_KH: requires 0 < s < t <= T");
  return kernel_KH_core(p, t - s, s, tol);
}

double kernel_KH_du(const KernelParams& p, double u, double s) {
  if (!(s > 0.0 && s < u)) throw std::domain_error("kernel_KH_du: requires 0 < s < u");
  const double H = p.hurst;
  if (p.regime() == KernelParams::Regime::Brownian) return 0.0;
  const double core = std::pow(u / s, H - 0.5) * std::pow(u - s, H - 1.5);
  if (p.regime() == KernelParams::Regime::High) return p.c_H * core;
  return p.c_H * (H - 0.5) * core;
}

double kstar_apply_at(const KernelParams& p, const WeightedFunction& psi, double s,
                      double tol, double* err_out) {
  if (!(s > 0.0 && s < p.T))
    throw std::domain_error("kstar_apply_at: s must be interior to (0,T)");
  return kstar_core(p, psi, s, p.T - s, tol, err_out,
                    std::numeric_limits<double>::quiet_NaN());
}

std::vector<double> kstar_apply(const KernelParams& p, const WeightedFunction& psi,
                                std::span<const double> s_grid, double tol,
                                std::vector<double>* errs) {
  std::vector<double> out(s_grid.size());
  std::vector<double> local_errs(s_grid.size(), 0.0);
  for (std::size_t i = 0; i < s_grid.size(); ++i)
    out[i] = kstar_apply_at(p, psi, s_grid[i], tol, &local_errs[i]);
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    if (!(local_errs[i] <= 100.0 * tol)) {
      std::ostringstream os;
      os << "kstar_apply: quadrature error estimate " << local_errs[i]
         << " above tolerance at s=" << s_grid[i];
      throw numerical_error(os.str());
    }
  }
  if (errs) *errs = std::move(local_errs);
  return out;
}

std::vector<double> integrate_pathwise(const KernelParams& p, const WeightedFunction& psi,
                                       const fbm::PathBatch& increments, int threads) {
  if (increments.kind != fbm::PathKind::BrownianIncrements)
    throw std::invalid_argument("integrate_pathwise: needs BrownianIncrements");
  if (std::fabs(increments.grid.T - p.T) > 1e-12 * std::max(1.0, p.T))
    throw std::invalid_argument("integrate_pathwise: grid horizon mismatch");
  const int n = increments.grid.n;
  if (n < 2) throw std::invalid_argument("integrate_pathwise: grid too coarse");
  const double T = p.T;
  const double dt = increments.grid.dt();
  const double kstar_tol = 1e-8;

  // Midpoint values everywhere except the cells hugging the endpoints, where
  // the per-cell L2 representative keeps the discrete variance faithful for
  // steeply singular kernels.
  const bool brownian_plain =
      p.regime() == KernelParams::Regime::Brownian && psi.endpoint_exponent > -0.25;
  const int tail_cells = brownian_plain ? 0 : std::min(16, n / 2);
  const int head_cells = brownian_plain ? 0 : std::min(2, n / 4);

  std::vector<double> w(static_cast<std::size_t>(n), 0.0);

  auto kstar_at_s = [&](double s) {
    return kstar_core(p, psi, s, T - s, kstar_tol, nullptr,
                      std::numeric_limits<double>::quiet_NaN());
  };
  auto kstar_at_v = [&](double v) {
    return kstar_core(p, psi, T - v, v, kstar_tol, nullptr,
                      std::numeric_limits<double>::quiet_NaN());
  };

  parallel_index(static_cast<std::size_t>(n), threads, [&](std::size_t iu) {
    const int i = static_cast<int>(iu);
    const bool head = i < head_cells;
    const bool tail = i >= n - tail_cells;
    if (!head && !tail) {
      const double v_mid = (static_cast<double>(n - i) - 0.5) * dt;
      const double s_mid = T - v_mid;
      if (p.regime() == KernelParams::Regime::Brownian)
        w[iu] = psi.value_at_distance(v_mid);
      else
        w[iu] = kstar_core(p, psi, s_mid, v_mid, kstar_tol, nullptr,
                           std::numeric_limits<double>::quiet_NaN());
      return;
    }
    const double e_head = -std::fabs(p.hurst - 0.5); // |K* psi| ~ s^{-|H-1/2|}
    const double e_tail = psi.endpoint_exponent + p.hurst - 0.5;
    double I = 0.0, Q = 0.0;
    if (i == 0) {
      const auto fI = [&](double s) { return kstar_at_s(s); };
      const auto fQ = [&](double s) { const double v = kstar_at_s(s); return v * v; };
      I = quad::power_edge(fI, dt, e_head, edge_opts(1e-9, psi.scale)).value;
      Q = quad::power_edge(fQ, dt, 2.0 * e_head, edge_opts(1e-10, psi.scale)).value;
    } else if (i == n - 1) {
      const auto fI = [&](double v) { return kstar_at_v(v); };
      const auto fQ = [&](double v) { const double x = kstar_at_v(v); return x * x; };
      I = quad::power_edge(fI, dt, e_tail, edge_opts(1e-9, psi.scale)).value;
      Q = quad::power_edge(fQ, dt, 2.0 * e_tail, edge_opts(1e-10, psi.scale)).value;
    } else {
      // interior special cell: plain Gauss, I and Q from the same evaluations
      const quad::GLRule& gl = quad::gl_rule(8);
      const double v_hi = static_cast<double>(n - i) * dt;
      const double v_lo = v_hi - dt;
      const double c = 0.5 * (v_lo + v_hi), h = 0.5 * dt;
      for (std::size_t j = 0; j < gl.x.size(); ++j) {
        const double v = c + h * gl.x[j];
        const double val = kstar_at_v(v);
        I += gl.w[j] * h * val;
        Q += gl.w[j] * h * val * val;
      }
    }
    if (Q <= 0.0) {
      w[iu] = 0.0;
    } else {
      const double mag = std::sqrt(Q / dt);
      w[iu] = (I < 0.0) ? -mag : mag;
    }
  });

  const std::size_t n_paths = increments.n_paths;
  std::vector<double> out(n_paths, 0.0);
  const double* data = increments.data.data();
  parallel_index(n_paths, threads, [&](std::size_t pth) {
    const double* row = data + pth * static_cast<std::size_t>(n);
    double acc = 0.0, comp = 0.0;
    for (int i = 0; i < n; ++i) {
      const double y = w[static_cast<std::size_t>(i)] * row[i] - comp;
      const double t = acc + y;
      comp = (t - acc) - y;
      acc = t;
    }
    out[pth] = acc;
  });
  return out;
}

double second_moment_pair(const KernelParams& p, const WeightedFunction& psi,
                          const WeightedFunction& phi, double tol) {
  const double T = p.T;
  const double H = p.hurst;

  if (p.regime() == KernelParams::Regime::Brownian) {
    const double v_min = std::max(psi.min_distance(), phi.min_distance());
    const double span = T - v_min;
    if (!(span > 0.0)) return 0.0;
    const auto f = [&](double v) {
      return psi.value_at_distance(v) * phi.value_at_distance(v);
    };
    const auto ga = [&](double y) { return f(v_min + y); };
    const auto gb = [&](double y) { return f(T - y); };
    const double qa = (v_min == 0.0)
                          ? psi.endpoint_exponent + phi.endpoint_exponent
                          : 0.0;
    const double scale_a = std::min(psi.scale, phi.scale);
    const Result r = quad::both_edges(ga, gb, span, qa, 0.0, edge_opts(0.5 * tol, scale_a),
                                      edge_opts(0.5 * tol,
                                                std::numeric_limits<double>::infinity()));
    return r.value;
  }

  if (p.regime() == KernelParams::Regime::High) {
    double e1 = 0.0, e2 = 0.0;
    const double j1 = v121_half(p, psi, phi, 0.5 * tol / p.alpha_H, &e1);
    const double j2 = (&psi == &phi) ? j1 : v121_half(p, phi, psi, 0.5 * tol / p.alpha_H, &e2);
    return p.alpha_H * (j1 + j2);
  }

  // Low regime: <K* psi, K* phi>_{L2(0,T)}
  // Pointwise noise integrates linearly, so the per-point budget can sit just
  // under the overall tolerance.
  const double kstar_tol = std::max(1e-12, 0.05 * tol / std::max(1.0, T));
  const auto F_s = [&](double s) {
    const double v_s = T - s;
    const double kh = kernel_KH_core(p, v_s, s, kstar_tol);
    return gram_point(p, psi, phi, s, v_s, kstar_tol, kh);
  };
  const auto F_v = [&](double v_s) {
    const double s = T - v_s;
    const double kh = kernel_KH_core(p, v_s, s, kstar_tol);
    return gram_point(p, psi, phi, s, v_s, kstar_tol, kh);
  };
  // K* psi behaves like s^{H-1/2} at the left end (the K_H(T,s) factor), so
  // the product carries exponent 2H-1 there.
  const double qa = 2.0 * H - 1.0;
  const double qb = psi.endpoint_exponent + phi.endpoint_exponent + 2.0 * H - 1.0;
  const double scale_b = std::min(psi.scale, phi.scale);
  const Result r = quad::both_edges(F_s, F_v, T, qa, qb,
                                    edge_opts(0.5 * tol,
                                              std::numeric_limits<double>::infinity()),
                                    edge_opts(0.5 * tol, scale_b));
  return r.value;
}

Eigen::MatrixXd second_moment_matrix(const KernelParams& p,
                                     const std::vector<WeightedFunction>& modes,
                                     double tol, int threads) {
  const int K = static_cast<int>(modes.size());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(K, K);
  if (K == 0) return B;
  const double T = p.T;
  const double H = p.hurst;
  double min_scale = std::numeric_limits<double>::infinity();
  double min_exp = 0.0;
  for (const auto& m : modes) {
    min_scale = std::min(min_scale, m.scale);
    min_exp = std::min(min_exp, m.endpoint_exponent);
  }

  if (p.regime() != KernelParams::Regime::High) {
    // Shared graded rule over s in (0,T): deep toward s=T where the product of
    // transfer values behaves like (T-s)^{2a+2H-1}, light toward s=0.
    const double q_hi = 2.0 * min_exp + 2.0 * H - 1.0;
    const double q_lo = (H < 0.5) ? 2.0 * H - 1.0 : 0.0;
    const GradedSide hi = graded_side(0.5 * T, q_hi, tol, min_scale, 8);
    const GradedSide lo = graded_side(0.5 * T, q_lo, tol,
                                      std::numeric_limits<double>::infinity(), 8);
    const std::size_t n_hi = hi.nodes.size(), n_lo = lo.nodes.size();
    Eigen::MatrixXd vals(n_hi + n_lo, K);
    const double kstar_tol = std::max(1e-12, 1e-3 * tol);
    parallel_index(n_hi + n_lo, threads, [&](std::size_t i) {
      double s, v_s;
      if (i < n_hi) {
        v_s = hi.nodes[i];
        s = T - v_s;
      } else {
        s = lo.nodes[i - n_hi];
        v_s = T - s;
      }
      if (p.regime() == KernelParams::Regime::Brownian) {
        for (int k = 0; k < K; ++k) vals(i, k) = modes[k].value_at_distance(v_s);
      } else {
        const double kh = kernel_KH_core(p, v_s, s, kstar_tol);
        for (int k = 0; k < K; ++k)
          vals(i, k) = kstar_core(p, modes[k], s, v_s, kstar_tol, nullptr, kh);
      }
    });
    for (std::size_t i = 0; i < n_hi + n_lo; ++i) {
      const double wt = (i < n_hi) ? hi.weights[i] : lo.weights[i - n_hi];
      for (int k = 0; k < K; ++k)
        for (int l = k; l < K; ++l) B(k, l) += wt * vals(i, k) * vals(i, l);
    }
    for (int k = 0; k < K; ++k)
      for (int l = 0; l < k; ++l) B(k, l) = B(l, k);
    return B;
  }

  // H > 1/2: B = alpha_H (J + J^T), J_kl = int psi_k(r) I_l(r) dr over the
  // lower triangle in distance coordinates.
  const double q_lo = 2.0 * min_exp + 2.0 * H - 1.0;
  const GradedSide lo = graded_side(0.5 * T, q_lo, tol / p.alpha_H, min_scale, 8);
  const GradedSide hi = graded_side(0.5 * T, 0.0, tol / p.alpha_H,
                                    std::numeric_limits<double>::infinity(), 8);
  const std::size_t n_nodes = lo.nodes.size() + hi.nodes.size();
  const double inner_tol = std::max(1e-13, 1e-3 * tol / p.alpha_H);
  Eigen::MatrixXd psi_vals(n_nodes, K), inner_vals(n_nodes, K);
  std::vector<double> node_r(n_nodes), node_w(n_nodes);
  for (std::size_t i = 0; i < lo.nodes.size(); ++i) {
    node_r[i] = lo.nodes[i];
    node_w[i] = lo.weights[i];
  }
  for (std::size_t i = 0; i < hi.nodes.size(); ++i) {
    node_r[lo.nodes.size() + i] = T - hi.nodes[i];
    node_w[lo.nodes.size() + i] = hi.weights[i];
  }
  parallel_index(n_nodes, threads, [&](std::size_t i) {
    const double r = node_r[i];
    for (int k = 0; k < K; ++k) {
      psi_vals(i, k) = modes[k].value_at_distance(r);
      inner_vals(i, k) = v121_inner(p, modes[k], r, inner_tol, nullptr);
    }
  });
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(K, K);
  for (std::size_t i = 0; i < n_nodes; ++i)
    for (int k = 0; k < K; ++k)
      for (int l = 0; l < K; ++l) J(k, l) += node_w[i] * psi_vals(i, k) * inner_vals(i, l);
  B = p.alpha_H * (J + J.transpose());
  return B;
}

double scaling_exponent_check(double alpha, double hurst, double lambda,
                              std::span<const double> t_list) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::domain_error("scaling_exponent_check: alpha must lie in (0,1]");
  if (!(alpha + hurst > 1.0))
    throw std::domain_error(
        "scaling_exponent_check: standing hypothesis alpha + H > 1 violated");
  if (!(lambda > 0.0))
    throw std::domain_error("scaling_exponent_check: lambda must be positive");
  if (t_list.size() < 2)
    throw std::invalid_argument("scaling_exponent_check: need at least 2 abscissae");
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    if (!(t_list[i] > 0.0) || (i > 0 && t_list[i] <= t_list[i - 1]))
      throw std::invalid_argument("scaling_exponent_check: t_list must be positive ascending");
  }

  const double growth = 2.0 * (alpha + hurst) - 2.0;
  std::vector<double> log_t, log_m;
  for (double t : t_list) {
    const KernelParams pt = KernelParams::make(hurst, t);
    const WeightedFunction psi = WeightedFunction::ml_kernel(alpha, lambda, t);
    const double tol = std::max(1e-13, 1e-7 * std::pow(t, growth));
    const double m = second_moment_pair(pt, psi, psi, tol);
    if (!(m > 0.0))
      throw numerical_error("scaling_exponent_check: non-positive moment computed");
    log_t.push_back(std::log(t));
    log_m.push_back(std::log(m));
  }
  const std::size_t n = log_t.size();
  double mt = 0.0, mm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mt += log_t[i];
    mm += log_m[i];
  }
  mt /= static_cast<double>(n);
  mm /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (log_t[i] - mt) * (log_t[i] - mt);
    sxy += (log_t[i] - mt) * (log_m[i] - mm);
  }
  return sxy / sxx;
}

} // namespace fracsource::fintegral
