#include "fracsource/fbm.hpp"

#include "fracsource/errors.hpp"
#include "fracsource/io.hpp"
#include "fracsource/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace fracsource::fbm {

namespace {

void check_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::domain_error("hurst index must lie in (0,1)");
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Partition [0, n_paths) into chunks and run fn(path) on each; results must be
// written to disjoint storage so the partition does not affect the output.
template <typename Fn>
void for_each_path(std::size_t n_paths, int threads, Fn&& fn) {
  const int nt = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n_paths, 1));
  if (nt <= 1) {
    for (std::size_t p = 0; p < n_paths; ++p) fn(p);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([=, &fn]() {
      for (std::size_t p = t; p < n_paths; p += nt) fn(p);
    });
  }
  for (auto& th : pool) th.join();
}

// In-place iterative radix-2 complex FFT (size must be a power of two).
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * 3.14159265358979323846264338327950288 / len;
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& z : a) z /= static_cast<double>(n);
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// fGn autocovariance at lag k for step dt: dt^{2H} (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2.
double fgn_autocov(double hurst, double dt, std::size_t k) {
  const double h2 = 2.0 * hurst;
  const double kk = static_cast<double>(k);
  const double v = 0.5 * (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) +
                          std::pow(std::fabs(kk - 1.0), h2));
  return std::pow(dt, h2) * v;
}

} // namespace

TimeGrid TimeGrid::uniform(double T, int n) {
  if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: T must be positive");
  if (n < 1) throw std::invalid_argument("TimeGrid: need at least 1 subinterval");
  return TimeGrid{T, n};
}

void PathBatch::write_csv(std::ostream& os) const {
  os << "# kind," << (kind == PathKind::BrownianIncrements ? "bm_increments" : "fbm_values")
     << ",H," << io::fmt17(hurst) << ",T," << io::fmt17(grid.T) << ",n," << grid.n
     << ",seed," << seed << "\n";
  const std::size_t c = cols();
  for (std::size_t p = 0; p < n_paths; ++p) {
    for (std::size_t j = 0; j < c; ++j) {
      if (j) os << ',';
      os << io::fmt17(data[p * c + j]);
    }
    os << "\n";
  }
}

double fbm_covariance(double hurst, double t, double s) {
  check_hurst(hurst);
  if (t < 0.0 || s < 0.0) throw std::domain_error("fbm_covariance: negative time");
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::fabs(t - s), h2));
}

PathBatch sample_bm_increments(const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed, int threads) {
  if (n_paths < 1) throw std::invalid_argument("sample_bm_increments: n_paths >= 1");
  PathBatch batch;
  batch.grid = grid;
  batch.kind = PathKind::BrownianIncrements;
  batch.hurst = 0.5;
  batch.n_paths = n_paths;
  batch.seed = seed;
  const std::size_t n = static_cast<std::size_t>(grid.n);
  batch.data.resize(n_paths * n);
  const double sd = std::sqrt(grid.dt());
  double* out = batch.data.data();
  for_each_path(n_paths, threads, [&, out](std::size_t p) {
    rng::GaussianStream gs(seed, p);
    double* row = out + p * n;
    for (std::size_t j = 0; j < n; ++j) row[j] = sd * gs.next();
  });
  return batch;
}

PathBatch sample_fbm_cholesky(double hurst, const TimeGrid& grid, std::size_t n_paths,
                              std::uint64_t seed, int threads) {
  check_hurst(hurst);
  if (grid.n > 4096)
    throw std::invalid_argument("sample_fbm_cholesky: n > 4096 (O(n^3) factorization guard)");
  if (n_paths < 1) throw std::invalid_argument("sample_fbm_cholesky: n_paths >= 1");

  const int n = grid.n;
  Eigen::MatrixXd cov(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = fbm_covariance(hurst, grid.node(i + 1), grid.node(j + 1));
      cov(i, j) = v;
      cov(j, i) = v;
    }

  PathBatch batch;
  batch.grid = grid;
  batch.kind = PathKind::FbmValues;
  batch.hurst = hurst;
  batch.n_paths = n_paths;
  batch.seed = seed;

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    // R_H matrices are ill-conditioned for small H; nudge the diagonal.
    const double jitter = 1e-12 * cov.trace() / n;
    cov.diagonal().array() += jitter;
    llt.compute(cov);
    batch.psd_jitter = true;
    if (llt.info() != Eigen::Success)
      throw numerical_error("sample_fbm_cholesky: covariance factorization failed "
                            "even with diagonal jitter (grid too fine for precision)");
  }
  const Eigen::MatrixXd L = llt.matrixL();

  batch.data.resize(n_paths * (static_cast<std::size_t>(n) + 1));
  double* out = batch.data.data();
  for_each_path(n_paths, threads, [&, out](std::size_t p) {
    rng::GaussianStream gs(seed, p);
    Eigen::VectorXd z(n);
    for (int j = 0; j < n; ++j) z(j) = gs.next();
    const Eigen::VectorXd vals = L.template triangularView<Eigen::Lower>() * z;
    double* row = out + p * (static_cast<std::size_t>(n) + 1);
    row[0] = 0.0;
    for (int j = 0; j < n; ++j) row[j + 1] = vals(j);
  });
  return batch;
}

PathBatch sample_fbm_circulant(double hurst, const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed, int threads) {
  check_hurst(hurst);
  if (n_paths < 1) throw std::invalid_argument("sample_fbm_circulant: n_paths >= 1");

  const std::size_t n = static_cast<std::size_t>(grid.n);
  const std::size_t m = next_pow2(2 * n);

  // First row of the circulant embedding of the fGn Toeplitz covariance.
  std::vector<std::complex<double>> c(m);
  for (std::size_t j = 0; j <= m / 2; ++j) c[j] = fgn_autocov(hurst, grid.dt(), j);
  for (std::size_t j = m / 2 + 1; j < m; ++j) c[j] = c[m - j];
  fft_pow2(c, false);

  double min_eig = 0.0, max_eig = 0.0;
  for (const auto& z : c) {
    min_eig = std::min(min_eig, z.real());
    max_eig = std::max(max_eig, z.real());
  }
  if (min_eig < -1e-10 * std::max(max_eig, 1e-300)) {
    PathBatch fb = sample_fbm_cholesky(hurst, grid, n_paths, seed, threads);
    fb.circulant_fallback = true;
    return fb;
  }

  std::vector<double> sqrt_eig(m);
  for (std::size_t j = 0; j < m; ++j)
    sqrt_eig[j] = std::sqrt(std::max(c[j].real(), 0.0) / static_cast<double>(m));

  PathBatch batch;
  batch.grid = grid;
  batch.kind = PathKind::FbmValues;
  batch.hurst = hurst;
  batch.n_paths = n_paths;
  batch.seed = seed;
  batch.data.resize(n_paths * (n + 1));
  double* out = batch.data.data();

  for_each_path(n_paths, threads, [&, out](std::size_t p) {
    rng::GaussianStream gs(seed, p);
    std::vector<std::complex<double>> z(m);
    z[0] = sqrt_eig[0] * gs.next();
    z[m / 2] = sqrt_eig[m / 2] * gs.next();
    const double inv_sqrt2 = 0.70710678118654752440084436210484904;
    for (std::size_t j = 1; j < m / 2; ++j) {
      const double re = gs.next(), im = gs.next();
      z[j] = std::complex<double>(re, im) * (sqrt_eig[j] * inv_sqrt2);
      z[m - j] = std::conj(z[j]);
    }
    fft_pow2(z, false);
    double* row = out + p * (n + 1);
    row[0] = 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      acc += z[j].real();
      row[j + 1] = acc;
    }
  });
  return batch;
}

} // namespace fracsource::fbm
