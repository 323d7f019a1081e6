#include "fracsource/mlf.hpp"

#include "fracsource/detail/dd.hpp"
#include "fracsource/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <vector>

namespace fracsource::mlf {

namespace {

using detail::DD;
using mp50 = boost::multiprecision::cpp_bin_float_50;
using mp100 = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<100>>;

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kLogPi = 1.14472988584940017414342735135305871;
constexpr double kHalfLog2Pi = 0.918938533204672741780329736405617639;

// Lanczos g=7, 9 coefficients; ~1e-15 relative on the positive axis.
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

bool is_nonpositive_integer(double x) {
  return x <= 0.0 && x == std::floor(x);
}

// sin(pi x) with argument reduction, accurate near integer x.
double sinpi(double x) {
  double r = std::fmod(x, 2.0);
  if (r < -1.0) r += 2.0;
  if (r > 1.0) r -= 2.0;
  if (r > 0.5) r = 1.0 - r;
  if (r < -0.5) r = -1.0 - r;
  return std::sin(kPi * r);
}

double lanczos_sum(double x) {
  double a = kLanczos[0];
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (x - 1.0 + i);
  return a;
}

// ln Gamma(x) for x >= 0.5.
double log_gamma_pos(double x) {
  const double t = x + kLanczosG - 0.5;
  return kHalfLog2Pi + (x - 0.5) * std::log(t) - t + std::log(lanczos_sum(x));
}

// log|1/Gamma(w)| and its sign for arbitrary real w; sign 0 at the poles.
struct LogRGamma {
  double log_abs;
  int sign;
};

LogRGamma log_reciprocal_gamma(double w) {
  if (is_nonpositive_integer(w)) return {-std::numeric_limits<double>::infinity(), 0};
  if (w >= 0.5) return {-log_gamma_pos(w), 1};
  // 1/Gamma(w) = sin(pi w) Gamma(1-w) / pi
  const double s = sinpi(w);
  return {std::log(std::fabs(s)) + log_gamma_pos(1.0 - w) - kLogPi, s >= 0.0 ? 1 : -1};
}

// --- per-(alpha,beta) coefficient tables ------------------------------------

struct SeriesTable {
  mutable std::shared_mutex mutex;
  std::vector<DD> inv_gamma;       // 1/Gamma(beta + alpha k), k = 0,1,...
  std::vector<double> asym_log;    // log|1/Gamma(beta - alpha k)|, k = 1,2,...
  std::vector<int> asym_sign;
};

DD inv_gamma_dd(double alpha, double beta, long k) {
  const double arg = beta + alpha * static_cast<double>(k);
  if (is_nonpositive_integer(arg)) return DD(0.0);
  const mp50 g = boost::math::tgamma(mp50(beta) + mp50(alpha) * k);
  const mp50 inv = 1 / g;
  const double hi = static_cast<double>(inv);
  const double lo = static_cast<double>(inv - hi);
  return DD(hi, lo);
}

SeriesTable& table_for(double alpha, double beta) {
  using Key = std::pair<double, double>;
  static std::shared_mutex registry_mutex;
  static std::map<Key, std::unique_ptr<SeriesTable>> tables;
  const Key key{alpha, beta};
  {
    std::shared_lock lk(registry_mutex);
    auto it = tables.find(key);
    if (it != tables.end()) return *it->second;
  }
  std::unique_lock lk(registry_mutex);
  auto& slot = tables[key];
  if (!slot) slot = std::make_unique<SeriesTable>();
  return *slot;
}

void ensure_taylor_terms(SeriesTable& t, double alpha, double beta, std::size_t upto) {
  std::unique_lock lk(t.mutex);
  for (std::size_t k = t.inv_gamma.size(); k < upto; ++k)
    t.inv_gamma.push_back(inv_gamma_dd(alpha, beta, static_cast<long>(k)));
}

void ensure_asym_terms(SeriesTable& t, double alpha, double beta, std::size_t upto) {
  std::unique_lock lk(t.mutex);
  for (std::size_t j = t.asym_log.size(); j < upto; ++j) {
    const LogRGamma r = log_reciprocal_gamma(beta - alpha * static_cast<double>(j + 1));
    t.asym_log.push_back(r.log_abs);
    t.asym_sign.push_back(r.sign);
  }
}

constexpr double kInternalTol = 1e-11;
constexpr std::size_t kMaxTaylorTerms = 4096;
constexpr std::size_t kAsymTerms = 220;
constexpr double kEpsDD = 5.0e-32;

// Closed forms for alpha = 1, integer beta m: E_{1,m}(x) = x^{1-m} e^x for m <= 1,
// and x^{1-m} (e^x - sum_{j<=m-2} x^j/j!) for m >= 2.
double ml_alpha1_integer_beta(long m, double x) {
  if (x == 0.0) return reciprocal_gamma(static_cast<double>(m));
  if (m <= 1) return std::pow(x, static_cast<double>(1 - m)) * std::exp(x);
  double partial = 0.0, term = 1.0;
  for (long j = 0; j <= m - 2; ++j) {
    partial += term;
    term *= x / static_cast<double>(j + 1);
  }
  return (std::exp(x) - partial) / std::pow(x, static_cast<double>(m - 1));
}

struct Attempt {
  double value = 0.0;
  double rel_err = std::numeric_limits<double>::infinity();
  bool ok = false;
};

// Asymptotic expansion at x = -y, y > 0:
//   E_{alpha,beta}(-y) ~ sum_{k>=1} (-1)^{k+1} y^{-k} / Gamma(beta - alpha k),
// truncated at the smallest term (the series is divergent; the first omitted
// term estimates the error).
Attempt try_asymptotic(SeriesTable& table, double y) {
  std::shared_lock lk(table.mutex);
  const double log_y = std::log(y);
  const std::size_t n = table.asym_log.size();

  // Precompute magnitudes. Individual coefficients can nearly vanish next to
  // Gamma poles, so truncation decisions use a forward-max envelope instead
  // of single terms.
  std::vector<double> mag(n);
  for (std::size_t j = 0; j < n; ++j)
    mag[j] = (table.asym_sign[j] == 0)
                 ? 0.0
                 : std::exp(-static_cast<double>(j + 1) * log_y + table.asym_log[j]);
  std::vector<double> env(n);
  for (std::size_t j = 0; j < n; ++j) {
    double e = mag[j];
    if (j + 1 < n) e = std::max(e, mag[j + 1]);
    if (j + 2 < n) e = std::max(e, mag[j + 2]);
    env[j] = e;
  }

  double sum = 0.0, abs_sum = 0.0;
  double tail_mag = std::numeric_limits<double>::infinity();
  std::size_t nonzero_used = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 1 && env[j] > env[j - 1] && env[j - 1] > 0.0) {
      tail_mag = env[j]; // optimal truncation: envelope started growing
      break;
    }
    const double alt = ((j % 2) == 0) ? 1.0 : -1.0; // (-1)^{k+1}
    sum += alt * static_cast<double>(table.asym_sign[j]) * mag[j];
    abs_sum += mag[j];
    if (mag[j] > 0.0) ++nonzero_used;
    if (env[j] < 1e-18 * std::fabs(sum)) {
      tail_mag = env[j];
      break;
    }
  }
  if (!std::isfinite(tail_mag)) tail_mag = n > 0 ? env[n - 1] : 0.0;
  Attempt a;
  if (nonzero_used == 0 || abs_sum == 0.0) return a;
  a.value = sum;
  const double scale = std::max(std::fabs(sum), std::numeric_limits<double>::min());
  // The first omitted term can run several times optimistic right at the
  // switchover; keep a safety factor so borderline points fall through to the
  // Taylor path instead.
  a.rel_err = 6.0 * (tail_mag + 1e-16 * abs_sum) / scale;
  a.ok = a.rel_err <= kInternalTol;
  return a;
}

struct TaylorOutcome {
  Attempt attempt;
  std::size_t need_terms = 0; // nonzero: extend table to this size and retry
};

// Taylor series of E_{alpha,beta}(x) accumulated in double-double with
// precomputed 1/Gamma coefficients. Valid for either sign of x; the error
// estimate accounts for the cancellation floor when x < 0.
TaylorOutcome taylor_dd_pass(SeriesTable& table, double alpha, double beta, double x) {
  std::shared_lock lk(table.mutex);
  const double peak_arg = std::pow(std::fabs(x), 1.0 / alpha);
  DD sum(0.0), power(1.0);
  double abs_sum = 0.0;
  std::size_t k = 0;
  double tail = std::numeric_limits<double>::infinity();
  const std::size_t have = table.inv_gamma.size();
  for (;; ++k) {
    if (k >= have) {
      if (have >= kMaxTaylorTerms) return {Attempt{}, 0}; // give up -> escalate
      return {Attempt{}, std::min(kMaxTaylorTerms, std::max<std::size_t>(have + 512, k + 512))};
    }
    const DD term = dd_mul(power, table.inv_gamma[k]);
    const double tmag = dd_abs(term);
    sum = dd_add(sum, term);
    abs_sum += tmag;
    const bool past_peak = alpha * static_cast<double>(k) + beta > peak_arg + 1.0;
    if (k > 2 && past_peak &&
        (tmag == 0.0 || tmag < 1e-35 * std::max(abs_sum, 1e-300))) {
      tail = tmag;
      break;
    }
    power = dd_mul(power, x);
    if (!std::isfinite(power.hi)) return {Attempt{}, 0}; // overflow -> escalate
  }
  Attempt a;
  a.value = sum.value();
  const double scale = std::max(std::fabs(a.value), std::numeric_limits<double>::min());
  a.rel_err = (kEpsDD * static_cast<double>(k + 2) * abs_sum + tail) / scale;
  a.ok = a.rel_err <= kInternalTol;
  return {a, 0};
}

Attempt try_taylor_dd(SeriesTable& table, double alpha, double beta, double x) {
  for (int round = 0; round < 12; ++round) {
    TaylorOutcome out = taylor_dd_pass(table, alpha, beta, x);
    if (out.need_terms == 0) return out.attempt;
    ensure_taylor_terms(table, alpha, beta, out.need_terms);
  }
  return {};
}

// Escalation path: plain summation in 100-digit floats with live Gamma calls.
Attempt taylor_mp(double alpha, double beta, double x) {
  const double peak_arg = std::pow(std::fabs(x), 1.0 / alpha);
  if (peak_arg > 2.5e4) return {}; // series impractically long
  const mp100 xx(x);
  mp100 sum(0), power(1), abs_sum(0);
  const mp100 cut("1e-45");
  for (std::size_t k = 0; k < 60000; ++k) {
    const mp100 arg = mp100(beta) + mp100(alpha) * static_cast<long>(k);
    mp100 term(0);
    if (!(arg <= 0 && floor(arg) == arg)) term = power / boost::math::tgamma(arg);
    sum += term;
    abs_sum += abs(term);
    const bool past_peak = alpha * static_cast<double>(k) + beta > peak_arg + 1.0;
    if (k > 2 && past_peak && abs(term) < cut * std::max(abs_sum, mp100(1e-300))) {
      Attempt a;
      a.value = static_cast<double>(sum);
      const double scale = std::max(std::fabs(a.value), std::numeric_limits<double>::min());
      const double eps_mp = 1e-98;
      a.rel_err = (static_cast<double>(abs_sum) * eps_mp +
                   static_cast<double>(abs(term))) / scale;
      a.ok = a.rel_err <= kInternalTol;
      return a;
    }
    power *= xx;
  }
  return {};
}

} // namespace

double gamma_fn(double x) {
  if (std::isnan(x)) throw std::domain_error("gamma_fn: NaN argument");
  if (is_nonpositive_integer(x))
    throw std::domain_error("gamma_fn: pole at non-positive integer argument");
  if (x >= 0.5) {
    const double t = x + kLanczosG - 0.5;
    return std::sqrt(2.0 * kPi) * std::pow(t, x - 0.5) * std::exp(-t) * lanczos_sum(x);
  }
  // Reflection: Gamma(x) = pi / (sin(pi x) Gamma(1-x))
  return kPi / (sinpi(x) * gamma_fn(1.0 - x));
}

double reciprocal_gamma(double x) {
  if (is_nonpositive_integer(x)) return 0.0;
  if (x >= 0.5) {
    const double t = x + kLanczosG - 0.5;
    return std::exp(t - (x - 0.5) * std::log(t)) / (std::sqrt(2.0 * kPi) * lanczos_sum(x));
  }
  return sinpi(x) * gamma_fn(1.0 - x) / kPi;
}

double ml_eval(const MLQuery& q) { return ml_eval(q.alpha, q.beta, q.x); }

double ml_eval(double alpha, double beta, double x) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::domain_error("ml_eval: alpha must lie in (0,2)");
  if (!std::isfinite(beta) || !std::isfinite(x))
    throw std::domain_error("ml_eval: non-finite argument");

  if (x == 0.0) return reciprocal_gamma(beta);
  if (alpha == 1.0 && beta == std::floor(beta) && std::fabs(beta) < 1e6)
    return ml_alpha1_integer_beta(static_cast<long>(beta), x);

  SeriesTable& table = table_for(alpha, beta);

  if (x < -2.0) {
    ensure_asym_terms(table, alpha, beta, kAsymTerms);
    const Attempt a = try_asymptotic(table, -x);
    if (a.ok) return a.value;
  }
  const Attempt t = try_taylor_dd(table, alpha, beta, x);
  if (t.ok) return t.value;
  const Attempt m = taylor_mp(alpha, beta, x);
  if (m.ok) return m.value;

  std::ostringstream os;
  os << "ml_eval: series/asymptotic switchover failed its error estimate at"
     << " alpha=" << alpha << " beta=" << beta << " x=" << x;
  throw numerical_error(os.str());
}

double ml_phi(double alpha, double lambda, double t) {
  if (!(t > 0.0)) throw std::domain_error("ml_phi: requires t > 0");
  if (!(lambda > 0.0)) throw std::domain_error("ml_phi: requires lambda > 0");
  return std::pow(t, alpha - 1.0) * ml_eval(alpha, alpha, -lambda * std::pow(t, alpha));
}

double ml_phi_derivative(double alpha, double lambda, double t) {
  if (!(t > 0.0)) throw std::domain_error("ml_phi_derivative: requires t > 0");
  if (!(lambda > 0.0)) throw std::domain_error("ml_phi_derivative: requires lambda > 0");
  return std::pow(t, alpha - 2.0) * ml_eval(alpha, alpha - 1.0, -lambda * std::pow(t, alpha));
}

} // namespace fracsource::mlf
