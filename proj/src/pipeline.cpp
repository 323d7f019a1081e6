#include "fracsource/pipeline.hpp"

#include "fracsource/errors.hpp"
#include "fracsource/inverse.hpp"
#include "fracsource/io.hpp"
#include "fracsource/version.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>

namespace fracsource::pipeline {

namespace {

using nlohmann::json;

std::string stamp_lines(const RunConfig& cfg) {
  std::ostringstream os;
  os << "# seed=" << cfg.sim.seed << "\n";
  os << "# config_sha256=" << cfg.config_hash() << "\n";
  return os.str();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw config_error("cannot create output directory '" + dir + "'");
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

json summary_skeleton(const RunConfig& cfg) {
  json j;
  j["config"] = json::parse(cfg.canonical_json());
  j["seed"] = cfg.sim.seed;
  j["config_sha256"] = cfg.config_hash();
  j["versions"]["fracsource"] = FRACSOURCE_VERSION_STRING;
  return j;
}

} // namespace

void run_simulate(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;
  ensure_dir(dir);

  const auto eig = forward::build_eigensystem(cfg.domain, cfg.sim.K);
  const auto result = forward::simulate_ensemble(cfg.sim, cfg.source, eig);
  const auto& mom = result.moments;

  {
    std::ostringstream os;
    os << stamp_lines(cfg);
    os << "k,lambda,mean,se_mean,var,se_var\n";
    for (int k = 0; k < cfg.sim.K; ++k) {
      os << (k + 1) << ',' << io::fmt17(eig.lambda(k)) << ',' << io::fmt17(mom.mean[k])
         << ',' << io::fmt17(mom.se_mean[k]) << ',' << io::fmt17(mom.variance[k]) << ','
         << io::fmt17(mom.se_variance[k]) << "\n";
    }
    io::write_text_file(join(dir, "ensemble_moments.csv"), os.str());
  }
  {
    std::ostringstream os;
    os << stamp_lines(cfg);
    for (int k = 0; k < cfg.sim.K; ++k) {
      for (int l = 0; l < cfg.sim.K; ++l) {
        if (l) os << ',';
        os << io::fmt17(mom.covariance(k, l));
      }
      os << "\n";
    }
    io::write_text_file(join(dir, "covariance.csv"), os.str());
  }
  {
    json j = summary_skeleton(cfg);
    j["paths"] = mom.paths;
    j["artifacts"] = {"ensemble_moments.csv", "covariance.csv"};
    io::write_text_file(join(dir, "run_summary.json"), j.dump(2) + "\n");
  }
}

void run_reconstruct(const RunConfig& cfg, const std::string& moments_path,
                     const std::string& covariance_path, const std::string& out_dir) {
  cfg.validate();
  const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;
  ensure_dir(dir);
  const int K = cfg.sim.K;

  const io::CsvTable table = io::read_csv(moments_path);
  const std::vector<std::string> expect = {"k",       "lambda", "mean",
                                           "se_mean", "var",    "se_var"};
  if (table.header != expect)
    throw config_error("moments file: unexpected header (want k,lambda,mean,se_mean,"
                       "var,se_var)");
  if (static_cast<int>(table.rows.size()) < K)
    throw config_error("moments file: fewer rows than configured modes K");

  forward::EnsembleMoments mom;
  mom.covariance = Eigen::MatrixXd::Zero(K, K);
  mom.se_covariance = Eigen::MatrixXd::Zero(K, K);
  for (int k = 0; k < K; ++k) {
    const auto& row = table.rows[k];
    if (row.size() != 6) throw config_error("moments file: malformed row");
    mom.mean.push_back(io::parse_double(row[2]));
    mom.se_mean.push_back(io::parse_double(row[3]));
    mom.variance.push_back(io::parse_double(row[4]));
    mom.se_variance.push_back(io::parse_double(row[5]));
  }
  bool have_cov = false;
  if (!covariance_path.empty()) {
    const io::CsvTable cov = io::read_csv(covariance_path);
    std::vector<std::vector<std::string>> rows = cov.rows;
    rows.insert(rows.begin(), cov.header); // dense matrix: no header row
    if (static_cast<int>(rows.size()) < K)
      throw config_error("covariance file: fewer rows than modes");
    for (int k = 0; k < K; ++k) {
      if (static_cast<int>(rows[k].size()) < K)
        throw config_error("covariance file: fewer columns than modes");
      for (int l = 0; l < K; ++l) mom.covariance(k, l) = io::parse_double(rows[k][l]);
    }
    have_cov = true;
  } else {
    for (int k = 0; k < K; ++k) mom.covariance(k, k) = mom.variance[k];
  }

  const auto eig = forward::build_eigensystem(cfg.domain, K);
  const auto factors = inverse::compute_factors(cfg.sim, eig, cfg.source.h);
  const int k_cut = cfg.k_cut > 0 ? cfg.k_cut : K;
  const auto fr = inverse::reconstruct_f(mom, factors, k_cut);
  const auto gr = inverse::reconstruct_g_abs(mom, factors, k_cut);

  const bool have_truth = !cfg.source.f.empty() || !cfg.source.g.empty();
  {
    std::ostringstream os;
    os << stamp_lines(cfg);
    os << "k,lambda,f_hat,g_abs_hat,inv_A,inv_B,f_err_rel,g_err_rel,clamped\n";
    for (int k = 0; k < K; ++k) {
      double f_err = std::nan(""), g_err = std::nan("");
      if (have_truth) {
        const double ft = cfg.source.f_coeff(k);
        const double gt = std::fabs(cfg.source.g_coeff(k));
        if (ft != 0.0) f_err = std::fabs(fr.f_hat[k] - ft) / std::fabs(ft);
        if (gt != 0.0) g_err = std::fabs(gr.g_abs[k] - gt) / gt;
      }
      os << (k + 1) << ',' << io::fmt17(eig.lambda(k)) << ',' << io::fmt17(fr.f_hat[k])
         << ',' << io::fmt17(gr.g_abs[k]) << ',' << io::fmt17(1.0 / factors.A[k]) << ','
         << io::fmt17(1.0 / factors.B(k, k)) << ',' << io::fmt17(f_err) << ','
         << io::fmt17(g_err) << ',' << (gr.g_sq_raw[k] < 0.0 ? 1 : 0) << "\n";
    }
    io::write_text_file(join(dir, "reconstruction.csv"), os.str());
  }
  {
    json j = summary_skeleton(cfg);
    j["k_cut"] = k_cut;
    j["f_hat"] = fr.f_hat;
    j["g_abs_hat"] = gr.g_abs;
    j["g_sq_raw"] = gr.g_sq_raw;
    j["clamped"] = gr.clamped;
    j["offdiag_residual"] = have_cov ? gr.offdiag_residual : std::nan("");
    j["A"] = factors.A;
    std::vector<double> bdiag(K);
    for (int k = 0; k < K; ++k) bdiag[k] = factors.B(k, k);
    j["B_diag"] = bdiag;
    io::write_text_file(join(dir, "reconstruction.json"), j.dump(2) + "\n");
  }
}

void run_instability(const RunConfig& cfg, double gamma, const std::string& out_dir) {
  cfg.validate();
  const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;
  ensure_dir(dir);
  const double g = gamma > 0.0 ? gamma : cfg.gamma;
  const auto eig = forward::build_eigensystem(cfg.domain, cfg.sim.K);
  const auto prof = inverse::instability_report(cfg.sim, eig, cfg.source.h, g, 1e-3,
                                                cfg.use_2gamma_h);
  std::ostringstream os;
  os << stamp_lines(cfg);
  os << "# gamma=" << io::fmt17(prof.gamma) << " beta=" << io::fmt17(prof.beta)
     << " slope_A=" << io::fmt17(prof.slope_A) << " slope_B=" << io::fmt17(prof.slope_B)
     << "\n";
  os << "k,lambda,t_star,A,B_kk,A_lambda,B_lambda_beta,amplification\n";
  for (std::size_t k = 0; k < prof.lambdas.size(); ++k) {
    os << (k + 1) << ',' << io::fmt17(prof.lambdas[k]) << ',' << io::fmt17(prof.t_star[k])
       << ',' << io::fmt17(prof.A[k]) << ',' << io::fmt17(prof.B_diag[k]) << ','
       << io::fmt17(prof.A_lambda[k]) << ',' << io::fmt17(prof.B_lambda_beta[k]) << ','
       << io::fmt17(prof.amplification[k]) << "\n";
  }
  io::write_text_file(join(dir, "instability.csv"), os.str());
}

} // namespace fracsource::pipeline
