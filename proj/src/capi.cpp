#include "fracsource/fracsource.h"

#include "fracsource/config.hpp"
#include "fracsource/errors.hpp"
#include "fracsource/fbm.hpp"
#include "fracsource/inverse.hpp"
#include "fracsource/mlf.hpp"
#include "fracsource/pipeline.hpp"
#include "fracsource/version.hpp"

#include <string>

struct frs_config {
  fracsource::RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

frs_status fail(frs_status code, const char* what) {
  g_last_error = what ? what : "unknown error";
  return code;
}

template <typename Fn>
frs_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return FRS_OK;
  } catch (const fracsource::config_error& e) {
    return fail(FRS_CONFIG_ERROR, e.what());
  } catch (const fracsource::numerical_error& e) {
    return fail(FRS_NUMERICAL_ERROR, e.what());
  } catch (const std::domain_error& e) {
    return fail(FRS_INVALID_ARGUMENT, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(FRS_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(FRS_NUMERICAL_ERROR, e.what());
  }
}

} // namespace

extern "C" {

const char* frs_version(void) { return FRACSOURCE_VERSION_STRING; }

const char* frs_last_error(void) { return g_last_error.c_str(); }

frs_status frs_config_load(const char* path, frs_config** out) {
  if (!path || !out) return fail(FRS_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new frs_config{fracsource::load_config(path)}; });
}

frs_status frs_config_parse(const char* json_text, frs_config** out) {
  if (!json_text || !out) return fail(FRS_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new frs_config{fracsource::parse_config(json_text)}; });
}

void frs_config_free(frs_config* cfg) { delete cfg; }

frs_status frs_config_set_seed(frs_config* cfg, unsigned long long seed) {
  if (!cfg) return fail(FRS_INVALID_ARGUMENT, "null config");
  cfg->cfg.sim.seed = seed;
  return FRS_OK;
}

frs_status frs_config_set_threads(frs_config* cfg, int threads) {
  if (!cfg) return fail(FRS_INVALID_ARGUMENT, "null config");
  if (threads < 0) return fail(FRS_CONFIG_ERROR, "threads must be >= 0");
  cfg->cfg.sim.threads = threads;
  return FRS_OK;
}

frs_status frs_config_set_out_dir(frs_config* cfg, const char* dir) {
  if (!cfg || !dir) return fail(FRS_INVALID_ARGUMENT, "null argument");
  cfg->cfg.out_dir = dir;
  return FRS_OK;
}

frs_status frs_config_set_gamma(frs_config* cfg, double gamma) {
  if (!cfg) return fail(FRS_INVALID_ARGUMENT, "null config");
  if (!(gamma > 0.0 && gamma < 1.0))
    return fail(FRS_CONFIG_ERROR, "gamma must lie in (0,1)");
  cfg->cfg.gamma = gamma;
  return FRS_OK;
}

frs_status frs_config_set_kcut(frs_config* cfg, int k_cut) {
  if (!cfg) return fail(FRS_INVALID_ARGUMENT, "null config");
  if (k_cut < 0 || k_cut > cfg->cfg.sim.K)
    return fail(FRS_CONFIG_ERROR, "k_cut must lie in [0, K]");
  cfg->cfg.k_cut = k_cut;
  return FRS_OK;
}

frs_status frs_run_simulate(const frs_config* cfg, const char* out_dir) {
  if (!cfg) return fail(FRS_INVALID_ARGUMENT, "null config");
  return guarded([&] {
    fracsource::pipeline::run_simulate(cfg->cfg, out_dir ? out_dir : "");
  });
}

frs_status frs_run_reconstruct(const frs_config* cfg, const char* moments_csv,
                               const char* covariance_csv, const char* out_dir) {
  if (!cfg || !moments_csv) return fail(FRS_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    fracsource::pipeline::run_reconstruct(cfg->cfg, moments_csv,
                                          covariance_csv ? covariance_csv : "",
                                          out_dir ? out_dir : "");
  });
}

frs_status frs_run_instability(const frs_config* cfg, double gamma,
                               const char* out_dir) {
  if (!cfg) return fail(FRS_INVALID_ARGUMENT, "null config");
  return guarded([&] {
    fracsource::pipeline::run_instability(cfg->cfg, gamma, out_dir ? out_dir : "");
  });
}

frs_status frs_run_selftest(int verbose) {
  bool ok = false;
  const frs_status st = guarded([&] { ok = fracsource::pipeline::run_selftest(verbose != 0); });
  if (st != FRS_OK) return st;
  if (!ok) return fail(FRS_NUMERICAL_ERROR, "selftest suites failed");
  return FRS_OK;
}

frs_status frs_gamma(double x, double* out) {
  if (!out) return fail(FRS_INVALID_ARGUMENT, "null output");
  return guarded([&] { *out = fracsource::mlf::gamma_fn(x); });
}

frs_status frs_ml_eval(double alpha, double beta, double x, double* out) {
  if (!out) return fail(FRS_INVALID_ARGUMENT, "null output");
  return guarded([&] { *out = fracsource::mlf::ml_eval(alpha, beta, x); });
}

frs_status frs_ml_phi(double alpha, double lambda, double t, double* out) {
  if (!out) return fail(FRS_INVALID_ARGUMENT, "null output");
  return guarded([&] { *out = fracsource::mlf::ml_phi(alpha, lambda, t); });
}

frs_status frs_fbm_covariance(double hurst, double t, double s, double* out) {
  if (!out) return fail(FRS_INVALID_ARGUMENT, "null output");
  return guarded([&] { *out = fracsource::fbm::fbm_covariance(hurst, t, s); });
}

frs_status frs_beta_exponent(double alpha, double hurst, double gamma, double* out) {
  if (!out) return fail(FRS_INVALID_ARGUMENT, "null output");
  return guarded([&] { *out = fracsource::inverse::beta_exponent(alpha, hurst, gamma); });
}

} // extern "C"
