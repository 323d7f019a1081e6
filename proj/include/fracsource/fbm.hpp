#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace fracsource::fbm {

// Uniform grid t_i = i T/n, i = 0..n.
struct TimeGrid {
  double T = 1.0;
  int n = 2;

  static TimeGrid uniform(double T, int n);
  double dt() const { return T / n; }
  double node(int i) const { return T * static_cast<double>(i) / n; }
  bool operator==(const TimeGrid&) const = default;
};

enum class PathKind { BrownianIncrements, FbmValues };

struct PathBatch {
  TimeGrid grid;
  PathKind kind = PathKind::BrownianIncrements;
  double hurst = 0.5;  // meaningful for FbmValues
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  bool psd_jitter = false;       // Cholesky diagonal jitter was applied
  bool circulant_fallback = false; // embedding failed, Cholesky used instead
  // Row-major, one row per path; n columns for increments, n+1 for values
  // (first value column is identically 0).
  std::vector<double> data;

  std::size_t cols() const {
    return kind == PathKind::BrownianIncrements ? static_cast<std::size_t>(grid.n)
                                                : static_cast<std::size_t>(grid.n) + 1;
  }
  double operator()(std::size_t path, std::size_t j) const { return data[path * cols() + j]; }

  void write_csv(std::ostream& os) const;
};

// R_H(t,s) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
double fbm_covariance(double hurst, double t, double s);

// i.i.d. N(0, T/n) increments of a standard Brownian motion, one row per path.
PathBatch sample_bm_increments(const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed, int threads = 0);

// Exact-in-distribution fBm values via Cholesky factorization of [R_H(t_i,t_j)].
// Distributional oracle for the circulant sampler; n is capped at 4096.
PathBatch sample_fbm_cholesky(double hurst, const TimeGrid& grid, std::size_t n_paths,
                              std::uint64_t seed, int threads = 0);

// fBm values via circulant embedding of the fGn autocovariance (FFT synthesis).
// Falls back to the Cholesky sampler when the embedding has a significantly
// negative eigenvalue; the returned batch records the fallback.
PathBatch sample_fbm_circulant(double hurst, const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed, int threads = 0);

} // namespace fracsource::fbm
