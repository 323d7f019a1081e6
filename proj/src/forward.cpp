#include "fracsource/forward.hpp"

#include "fracsource/errors.hpp"
#include "fracsource/mlf.hpp"
#include "fracsource/quad.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fracsource::forward {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

} // namespace

Domain Domain::interval(double L) {
  if (!(L > 0.0)) throw config_error("interval length must be positive");
  Domain d;
  d.type = Type::Interval;
  d.L = L;
  return d;
}

Domain Domain::rectangle(double Lx, double Ly) {
  if (!(Lx > 0.0 && Ly > 0.0)) throw config_error("rectangle sides must be positive");
  Domain d;
  d.type = Type::Rectangle;
  d.Lx = Lx;
  d.Ly = Ly;
  return d;
}

double EigenSystem::eval(int k, double x) const {
  if (domain.type != Domain::Type::Interval)
    throw std::invalid_argument("EigenSystem::eval(x): domain is not an interval");
  const int m = modes.at(k)[0];
  return std::sqrt(2.0 / domain.L) * std::sin(m * kPi * x / domain.L);
}

double EigenSystem::eval(int k, double x, double y) const {
  if (domain.type != Domain::Type::Rectangle)
    throw std::invalid_argument("EigenSystem::eval(x,y): domain is not a rectangle");
  const auto [m, n] = modes.at(k);
  return 2.0 / std::sqrt(domain.Lx * domain.Ly) * std::sin(m * kPi * x / domain.Lx) *
         std::sin(n * kPi * y / domain.Ly);
}

EigenSystem build_eigensystem(const Domain& domain, int K) {
  if (K < 1) throw std::invalid_argument("build_eigensystem: K >= 1 required");
  EigenSystem sys;
  sys.domain = domain;
  if (domain.type == Domain::Type::Interval) {
    for (int k = 1; k <= K; ++k) {
      const double w = k * kPi / domain.L;
      sys.lambdas.push_back(w * w);
      sys.modes.push_back({k, 0});
    }
    return sys;
  }
  // Rectangle: enumerate enough (m,n) candidates, sort by eigenvalue then index.
  const int M = K + 1;
  struct Entry {
    double lambda;
    int m, n;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(M) * M);
  for (int m = 1; m <= M; ++m)
    for (int n = 1; n <= M; ++n) {
      const double lam = kPi * kPi * (m * m / (domain.Lx * domain.Lx) +
                                      n * n / (domain.Ly * domain.Ly));
      entries.push_back({lam, m, n});
    }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.m != b.m) return a.m < b.m;
    return a.n < b.n;
  });
  for (int k = 0; k < K; ++k) {
    sys.lambdas.push_back(entries[k].lambda);
    sys.modes.push_back({entries[k].m, entries[k].n});
  }
  return sys;
}

double TimeFunction::operator()(double t) const {
  switch (type) {
    case Type::Constant:
      return value;
    case Type::SinOffset:
      return offset + amplitude * std::sin(frequency * t);
    case Type::Samples: {
      if (times.empty()) throw config_error("sampled time factor has no nodes");
      if (t <= times.front()) return values.front();
      if (t >= times.back()) return values.back();
      const auto it = std::upper_bound(times.begin(), times.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - times.begin());
      const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
      return values[i - 1] * (1.0 - w) + values[i] * w;
    }
  }
  return value;
}

void TimeFunction::validate(double T) const {
  if (!(lower_bound > 0.0))
    throw config_error("time factor h needs a positive certified lower bound c_h "
                       "(h positive and bounded from below)");
  if (type == Type::Samples) {
    if (times.size() != values.size() || times.size() < 2)
      throw config_error("sampled time factor needs matching times/values (>= 2)");
    if (!std::is_sorted(times.begin(), times.end()))
      throw config_error("sampled time factor needs ascending times");
  }
  const int probes = 1024;
  for (int i = 0; i <= probes; ++i) {
    const double t = T * static_cast<double>(i) / probes;
    if ((*this)(t) < lower_bound * (1.0 - 1e-12))
      throw config_error("time factor h dips below its declared lower bound c_h");
  }
}

void SourceSpec::validate(double T) const {
  h.validate(T);
  const bool any_g = std::any_of(g.begin(), g.end(), [](double v) { return v != 0.0; });
  if (!any_g)
    throw config_error("source needs g != 0 (at least one nonzero g coefficient)");
}

void SimConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw config_error("alpha must lie in (0,1]");
  if (!(hurst > 0.0 && hurst < 1.0))
    throw config_error("hurst must lie in (0,1)");
  if (!(alpha + hurst > 1.0)) {
    std::ostringstream os;
    os << "standing hypothesis alpha + H > 1 violated (alpha=" << alpha
       << ", H=" << hurst << "): the mild solution's second moments are not "
       << "defined for alpha + H <= 1";
    throw config_error(os.str());
  }
  if (!(T > 0.0)) throw config_error("T must be positive");
  if (n < 2) throw config_error("time grid needs n >= 2 cells");
  if (K < 1) throw config_error("mode count K >= 1 required");
  if (paths < 1) throw config_error("path count M >= 1 required");
  if (!(tol_moment > 0.0 && tol_kstar > 0.0))
    throw config_error("quadrature tolerances must be positive");
}

double ml_time_integral(double alpha, double lambda, double t, const TimeFunction& h,
                        double tol) {
  if (!(t > 0.0)) throw std::domain_error("ml_time_integral: t > 0 required");
  const double span = std::pow(t, alpha);
  const auto g = [&](double w) {
    return mlf::ml_eval(alpha, alpha, -lambda * w) * h(t - std::pow(w, 1.0 / alpha));
  };
  quad::Options opt;
  opt.abs_tol = tol * std::max(1.0, span);
  opt.scale_hint = 1.0 / lambda;
  const quad::Result r = quad::power_edge(g, span, 0.0, opt);
  return r.value / alpha;
}

double deterministic_coefficient(int k, double t, const SimConfig& config,
                                 const SourceSpec& source, const EigenSystem& eig) {
  if (!(t > 0.0 && t <= config.T))
    throw std::domain_error("deterministic_coefficient: t in (0, T] required");
  const double fk = source.f_coeff(k);
  if (fk == 0.0) return 0.0;
  return fk * ml_time_integral(config.alpha, eig.lambda(k), t, source.h);
}

std::vector<double> stochastic_coefficient_samples(int k, const SimConfig& config,
                                                   const SourceSpec& source,
                                                   const EigenSystem& eig,
                                                   const fbm::PathBatch& bm) {
  const double gk = source.g_coeff(k);
  if (gk == 0.0) return std::vector<double>(bm.n_paths, 0.0);
  const auto params = fintegral::KernelParams::make(config.hurst, config.T);
  const auto psi = fintegral::WeightedFunction::ml_kernel(config.alpha, eig.lambda(k),
                                                          config.T);
  std::vector<double> samples = fintegral::integrate_pathwise(params, psi, bm,
                                                              config.threads);
  for (double& v : samples) v *= gk;
  return samples;
}

EnsembleResult simulate_ensemble(const SimConfig& config, const SourceSpec& source,
                                 const EigenSystem& eig) {
  config.validate();
  source.validate(config.T);
  const int K = config.K;
  const std::size_t M = config.paths;

  const auto grid = fbm::TimeGrid::uniform(config.T, config.n);
  const fbm::PathBatch bm =
      fbm::sample_bm_increments(grid, M, config.seed, config.threads);

  EnsembleResult result;
  result.samples.resize(static_cast<Eigen::Index>(M), K);
  for (int k = 0; k < K; ++k) {
    const double det = deterministic_coefficient(k, config.T, config, source, eig);
    const std::vector<double> stoch =
        stochastic_coefficient_samples(k, config, source, eig, bm);
    for (std::size_t m = 0; m < M; ++m)
      result.samples(static_cast<Eigen::Index>(m), k) = det + stoch[m];
  }

  EnsembleMoments& mom = result.moments;
  mom.paths = M;
  mom.mean.assign(K, 0.0);
  mom.se_mean.assign(K, 0.0);
  mom.variance.assign(K, 0.0);
  mom.se_variance.assign(K, 0.0);
  mom.covariance = Eigen::MatrixXd::Zero(K, K);
  mom.se_covariance = Eigen::MatrixXd::Zero(K, K);

  // Compensated means, then two-pass (co)variances in fixed path order so the
  // reduction is independent of the thread partition upstream.
  for (int k = 0; k < K; ++k) {
    double acc = 0.0, comp = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      const double y = result.samples(static_cast<Eigen::Index>(m), k) - comp;
      const double t = acc + y;
      comp = (t - acc) - y;
      acc = t;
    }
    mom.mean[k] = acc / static_cast<double>(M);
  }
  for (int k = 0; k < K; ++k) {
    for (int l = k; l < K; ++l) {
      double acc = 0.0, comp = 0.0;
      for (std::size_t m = 0; m < M; ++m) {
        const double dk = result.samples(static_cast<Eigen::Index>(m), k) - mom.mean[k];
        const double dl = result.samples(static_cast<Eigen::Index>(m), l) - mom.mean[l];
        const double y = dk * dl - comp;
        const double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
      }
      const double cv = M > 1 ? acc / static_cast<double>(M - 1) : 0.0;
      mom.covariance(k, l) = cv;
      mom.covariance(l, k) = cv;
    }
  }
  for (int k = 0; k < K; ++k) {
    mom.variance[k] = mom.covariance(k, k);
    mom.se_mean[k] = std::sqrt(std::max(mom.variance[k], 0.0) / static_cast<double>(M));
    mom.se_variance[k] =
        mom.variance[k] * std::sqrt(2.0 / static_cast<double>(M > 1 ? M - 1 : 1));
  }
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) {
      const double v = (mom.variance[k] * mom.variance[l] +
                        mom.covariance(k, l) * mom.covariance(k, l)) /
                       static_cast<double>(M > 1 ? M - 1 : 1);
      mom.se_covariance(k, l) = std::sqrt(std::max(v, 0.0));
    }
  return result;
}

std::vector<double> assemble_field(std::span<const double> coeffs,
                                   std::span<const double> x_grid,
                                   const EigenSystem& eig) {
  if (static_cast<int>(coeffs.size()) > eig.count())
    throw std::invalid_argument("assemble_field: more coefficients than modes");
  std::vector<double> out(x_grid.size(), 0.0);
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k)
      acc += coeffs[k] * eig.eval(static_cast<int>(k), x_grid[i]);
    out[i] = acc;
  }
  return out;
}

std::vector<double> assemble_field_2d(std::span<const double> coeffs,
                                      std::span<const double> x_grid,
                                      std::span<const double> y_grid,
                                      const EigenSystem& eig) {
  if (static_cast<int>(coeffs.size()) > eig.count())
    throw std::invalid_argument("assemble_field_2d: more coefficients than modes");
  std::vector<double> out(x_grid.size() * y_grid.size(), 0.0);
  for (std::size_t i = 0; i < x_grid.size(); ++i)
    for (std::size_t j = 0; j < y_grid.size(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < coeffs.size(); ++k)
        acc += coeffs[k] * eig.eval(static_cast<int>(k), x_grid[i], y_grid[j]);
      out[i * y_grid.size() + j] = acc;
    }
  return out;
}

} // namespace fracsource::forward
