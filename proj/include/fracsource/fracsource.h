/* fracsource C API
 *
 * Spectral simulation of the stochastic time-fractional diffusion equation
 * driven by fractional Brownian motion, and reconstruction of the source
 * factors from final-time statistics.
 *
 * All entry points return an frs_status; on failure a thread-local message is
 * available through frs_last_error(). Handles are opaque and freed with their
 * matching *_free call.
 */
#ifndef FRACSOURCE_H
#define FRACSOURCE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum frs_status {
  FRS_OK = 0,
  FRS_INVALID_ARGUMENT = 1,
  FRS_CONFIG_ERROR = 2,
  FRS_NUMERICAL_ERROR = 3,
  FRS_IO_ERROR = 4
} frs_status;

const char* frs_version(void);

/* Message for the most recent failing call on this thread ("" if none). */
const char* frs_last_error(void);

/* ---- configuration ------------------------------------------------------ */

typedef struct frs_config frs_config;

frs_status frs_config_load(const char* path, frs_config** out);
frs_status frs_config_parse(const char* json_text, frs_config** out);
void frs_config_free(frs_config* cfg);

frs_status frs_config_set_seed(frs_config* cfg, unsigned long long seed);
frs_status frs_config_set_threads(frs_config* cfg, int threads);
frs_status frs_config_set_out_dir(frs_config* cfg, const char* dir);
frs_status frs_config_set_gamma(frs_config* cfg, double gamma);
frs_status frs_config_set_kcut(frs_config* cfg, int k_cut);

/* ---- pipeline runners (write CSV/JSON artifacts) ------------------------ */

/* out_dir may be NULL to use the configured output directory. */
frs_status frs_run_simulate(const frs_config* cfg, const char* out_dir);

/* covariance_csv may be NULL (off-diagonal consistency is then skipped). */
frs_status frs_run_reconstruct(const frs_config* cfg, const char* moments_csv,
                               const char* covariance_csv, const char* out_dir);

/* gamma <= 0 uses the configured value. */
frs_status frs_run_instability(const frs_config* cfg, double gamma,
                               const char* out_dir);

/* Runs the ML/fBm/isometry property suites; prints one line per suite when
 * verbose != 0. Returns FRS_OK when all pass, FRS_NUMERICAL_ERROR otherwise. */
frs_status frs_run_selftest(int verbose);

/* ---- direct numeric surface --------------------------------------------- */

frs_status frs_gamma(double x, double* out);
frs_status frs_ml_eval(double alpha, double beta, double x, double* out);
frs_status frs_ml_phi(double alpha, double lambda, double t, double* out);
frs_status frs_fbm_covariance(double hurst, double t, double s, double* out);
frs_status frs_beta_exponent(double alpha, double hurst, double gamma, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FRACSOURCE_H */
