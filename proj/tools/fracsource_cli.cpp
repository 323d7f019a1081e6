// Command-line front end. Talks to the library strictly through the C API in
// fracsource/fracsource.h; exit codes: 0 ok, 2 config error, 3 numerical
// failure.

#include "fracsource/fracsource.h"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>

namespace {

int status_to_exit(frs_status st) {
  switch (st) {
    case FRS_OK:
      return 0;
    case FRS_CONFIG_ERROR:
    case FRS_INVALID_ARGUMENT:
      return 2;
    case FRS_NUMERICAL_ERROR:
    case FRS_IO_ERROR:
    default:
      return 3;
  }
}

int report(frs_status st) {
  if (st != FRS_OK) std::fprintf(stderr, "error: %s\n", frs_last_error());
  return status_to_exit(st);
}

struct ConfigHandle {
  frs_config* ptr = nullptr;
  ~ConfigHandle() { frs_config_free(ptr); }
};

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  unsigned long long seed = 0;
  bool seed_set = false;
  int threads = -1;
  double gamma = 0.0;
  int kcut = -1;
};

int load_with_overrides(const CommonOpts& opts, ConfigHandle& handle) {
  frs_status st = frs_config_load(opts.config_path.c_str(), &handle.ptr);
  if (st != FRS_OK) return report(st);
  if (opts.seed_set && (st = frs_config_set_seed(handle.ptr, opts.seed)) != FRS_OK)
    return report(st);
  if (opts.threads >= 0 && (st = frs_config_set_threads(handle.ptr, opts.threads)) != FRS_OK)
    return report(st);
  if (!opts.out_dir.empty() &&
      (st = frs_config_set_out_dir(handle.ptr, opts.out_dir.c_str())) != FRS_OK)
    return report(st);
  if (opts.gamma > 0.0 && (st = frs_config_set_gamma(handle.ptr, opts.gamma)) != FRS_OK)
    return report(st);
  if (opts.kcut >= 0 && (st = frs_config_set_kcut(handle.ptr, opts.kcut)) != FRS_OK)
    return report(st);
  return -1; // loaded fine
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool need_config = true) {
  auto* c = cmd->add_option("--config", opts.config_path, "run configuration (JSON)");
  if (need_config) c->required();
  cmd->add_option("--out-dir", opts.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", opts.seed, "master seed (overrides config)")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--threads", opts.threads, "worker cap (0 = hardware)");
  cmd->add_option("--gamma", opts.gamma, "instability split exponent in (0,1)");
  cmd->add_option("--kcut", opts.kcut, "spectral truncation level");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic time-fractional diffusion: simulate, reconstruct, "
               "and instability diagnostics"};
  app.require_subcommand(1);

  CommonOpts sim_opts, rec_opts, inst_opts;
  std::string moments_path, covariance_path;
  bool selftest_verbose = false;

  auto* sim = app.add_subcommand("simulate",
                                 "run the forward Monte Carlo and write moment CSVs");
  add_common(sim, sim_opts);

  auto* rec = app.add_subcommand("reconstruct",
                                 "recover f and |g| from a moments CSV");
  add_common(rec, rec_opts);
  rec->add_option("moments", moments_path, "ensemble_moments.csv from simulate")
      ->required();
  rec->add_option("--covariance", covariance_path,
                  "covariance.csv (enables the off-diagonal consistency residual)");

  auto* inst = app.add_subcommand("instability",
                                  "tabulate the decay of the inversion factors");
  add_common(inst, inst_opts);

  auto* self = app.add_subcommand("selftest", "run the built-in property suites");
  self->add_flag("--quiet", selftest_verbose, "suppress per-suite lines");

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    ConfigHandle h;
    const int rc = load_with_overrides(sim_opts, h);
    if (rc >= 0) return rc;
    return report(frs_run_simulate(h.ptr, nullptr));
  }
  if (rec->parsed()) {
    ConfigHandle h;
    const int rc = load_with_overrides(rec_opts, h);
    if (rc >= 0) return rc;
    return report(frs_run_reconstruct(h.ptr, moments_path.c_str(),
                                      covariance_path.empty() ? nullptr
                                                              : covariance_path.c_str(),
                                      nullptr));
  }
  if (inst->parsed()) {
    ConfigHandle h;
    const int rc = load_with_overrides(inst_opts, h);
    if (rc >= 0) return rc;
    return report(frs_run_instability(h.ptr, inst_opts.gamma, nullptr));
  }
  if (self->parsed()) {
    return report(frs_run_selftest(selftest_verbose ? 0 : 1));
  }
  return 0;
}
