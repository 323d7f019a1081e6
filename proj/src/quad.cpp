#include "fracsource/quad.hpp"

#include "fracsource/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>

namespace fracsource::quad {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

GLRule make_gl_rule(int n) {
  GLRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    r.x[i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return r;
}

double kahan_total(std::vector<double>& vals) {
  std::sort(vals.begin(), vals.end(),
            [](double a, double b) { return std::fabs(a) < std::fabs(b); });
  double s = 0.0, c = 0.0;
  for (double v : vals) {
    const double y = v - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

struct Cell {
  double lo, hi;   // distance coordinates
  double val, err;
};

class EdgeIntegrator {
public:
  EdgeIntegrator(const std::function<double(double)>& g, double q, const Options& opt)
      : g_(g), q_(q), opt_(opt),
        hi_rule_(gl_rule(8)), lo_rule_(gl_rule(4)) {}

  Result run(double span) {
    Result res;
    if (!(span > 0.0)) return res;

    double h0 = span * opt_.finest_rel;
    if (std::isfinite(opt_.scale_hint) && opt_.scale_hint > 0.0)
      h0 = std::min(h0, opt_.scale_hint * 1e-3);
    h0 = std::max(h0, span * 1e-280);

    // Deepen until the stub mass estimate is negligible against the budget.
    for (int i = 0; i < 60; ++i) {
      const double mass = stub_mass_estimate(h0);
      if (!(mass > 0.05 * opt_.abs_tol) || h0 <= span * 1e-270) break;
      h0 *= 1.0 / 64.0;
    }

    double stub_val = 0.0, stub_err = 0.0;
    integrate_stub(h0, stub_val, stub_err);

    // Geometric bands [h, min(2h, span)].
    std::vector<Cell> cells;
    for (double h = h0; h < span;) {
      const double top = std::min(2.0 * h, span);
      cells.push_back(make_cell(h, top));
      h = top;
    }

    auto worse = [](const Cell& a, const Cell& b) { return a.err < b.err; };
    std::priority_queue<Cell, std::vector<Cell>, decltype(worse)> heap(worse);
    double total_err = stub_err;
    double total_val = stub_val;
    std::vector<double> done_vals;
    for (const Cell& c : cells) {
      heap.push(c);
      total_err += c.err;
      total_val += c.val;
    }

    auto budget = [&]() {
      double b = opt_.abs_tol;
      if (opt_.rel_tol > 0.0) b = std::max(b, opt_.rel_tol * std::fabs(total_val));
      return b;
    };

    int refines = 0;
    std::vector<Cell> finished;
    while (!heap.empty()) {
      if (total_err <= budget() || refines >= opt_.max_refine) {
        while (!heap.empty()) {
          finished.push_back(heap.top());
          heap.pop();
        }
        break;
      }
      Cell c = heap.top();
      heap.pop();
      if (c.err <= 0.25 * budget() / (1.0 + static_cast<double>(finished.size() + heap.size()))) {
        finished.push_back(c);
        continue;
      }
      const double mid = 0.5 * (c.lo + c.hi);
      Cell left = make_cell(c.lo, mid);
      Cell right = make_cell(mid, c.hi);
      total_err += left.err + right.err - c.err;
      total_val += left.val + right.val - c.val;
      heap.push(left);
      heap.push(right);
      ++refines;
    }

    done_vals.reserve(finished.size() + 1);
    for (const Cell& c : finished) done_vals.push_back(c.val);
    done_vals.push_back(stub_val);
    res.value = kahan_total(done_vals);
    res.err = total_err;
    res.evals = evals_;
    return res;
  }

private:
  double eval(double v) {
    ++evals_;
    return g_(v);
  }

  double stub_mass_estimate(double h0) {
    const double gv = eval(h0);
    if (!std::isfinite(gv)) return std::numeric_limits<double>::infinity();
    return std::fabs(gv) * h0 / (q_ + 1.0);
  }

  // Product rule on [0, h0]: interpolate s(v) = g(v) v^{-q} quadratically and
  // integrate against the exact moments of v^q.
  void integrate_stub(double h0, double& val, double& err) {
    if (h0 <= 0.0) {
      val = err = 0.0;
      return;
    }
    const double v1 = 0.25 * h0, v2 = 0.625 * h0, v3 = h0;
    const double s1 = smooth_part(v1), s2 = smooth_part(v2), s3 = smooth_part(v3);
    const double m0 = std::pow(h0, q_ + 1.0) / (q_ + 1.0);
    const double m1 = std::pow(h0, q_ + 2.0) / (q_ + 2.0);
    const double m2 = std::pow(h0, q_ + 3.0) / (q_ + 3.0);
    // Newton form through (v1,s1),(v2,s2),(v3,s3)
    const double d01 = (s2 - s1) / (v2 - v1);
    const double d12 = (s3 - s2) / (v3 - v2);
    const double d012 = (d12 - d01) / (v3 - v1);
    const double quad_val = s1 * m0 + d01 * (m1 - v1 * m0) +
                            d012 * (m2 - (v1 + v2) * m1 + v1 * v2 * m0);
    // Linear comparison through (v1,s1),(v3,s3)
    const double dl = (s3 - s1) / (v3 - v1);
    const double lin_val = s1 * m0 + dl * (m1 - v1 * m0);
    val = quad_val;
    err = std::fabs(quad_val - lin_val);
    if (!std::isfinite(val)) {
      val = 0.0;
      err = std::numeric_limits<double>::infinity();
    }
  }

  double smooth_part(double v) { return eval(v) * std::pow(v, -q_); }

  Cell make_cell(double lo, double hi) {
    Cell c{lo, hi, 0.0, 0.0};
    c.val = gl_on(hi_rule_, lo, hi);
    const double coarse = gl_on(lo_rule_, lo, hi);
    c.err = std::fabs(c.val - coarse);
    if (!std::isfinite(c.val)) {
      c.val = 0.0;
      c.err = std::numeric_limits<double>::infinity();
    }
    return c;
  }

  double gl_on(const GLRule& rule, double lo, double hi) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i)
      s += rule.w[i] * eval(c + h * rule.x[i]);
    return s * h;
  }

  const std::function<double(double)>& g_;
  double q_;
  Options opt_;
  const GLRule& hi_rule_;
  const GLRule& lo_rule_;
  std::size_t evals_ = 0;
};

} // namespace

const GLRule& gl_rule(int n) {
  static std::mutex m;
  static std::map<int, GLRule> rules;
  std::scoped_lock lk(m);
  auto it = rules.find(n);
  if (it == rules.end()) it = rules.emplace(n, make_gl_rule(n)).first;
  return it->second;
}

Result power_edge(const std::function<double(double)>& g, double span, double q,
                  const Options& opt) {
  if (!(q > -1.0)) throw numerical_error("power_edge: non-integrable exponent q <= -1");
  EdgeIntegrator integ(g, q, opt);
  return integ.run(span);
}

Result both_edges(const std::function<double(double)>& ga,
                  const std::function<double(double)>& gb, double span,
                  double qa, double qb, const Options& opt_a, const Options& opt_b) {
  Result res;
  if (!(span > 0.0)) return res;
  const double half = 0.5 * span;
  Options oa = opt_a, ob = opt_b;
  oa.abs_tol = 0.5 * opt_a.abs_tol;
  ob.abs_tol = 0.5 * opt_b.abs_tol;
  // Left half in distance-from-a coordinates in reverse: integral over v in
  // [0, half] of f(a+v) = ga(v); right half likewise from b.
  const Result ra = power_edge(ga, half, qa, oa);
  const Result rb = power_edge(gb, half, qb, ob);
  res.value = ra.value + rb.value;
  res.err = ra.err + rb.err;
  res.evals = ra.evals + rb.evals;
  return res;
}

CompositeRule graded_rule(double span, double h0, int gl_order) {
  CompositeRule r;
  if (!(span > 0.0)) return r;
  h0 = std::clamp(h0, span * 1e-280, span);
  const GLRule& gl = gl_rule(gl_order);
  for (double h = h0; h < span;) {
    const double top = std::min(2.0 * h, span);
    const double c = 0.5 * (h + top), hw = 0.5 * (top - h);
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
      r.nodes.push_back(c + hw * gl.x[i]);
      r.weights.push_back(gl.w[i] * hw);
    }
    h = top;
  }
  return r;
}

} // namespace fracsource::quad
