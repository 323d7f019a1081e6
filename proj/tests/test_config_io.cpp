#include "fracsource/config.hpp"

#include "fracsource/errors.hpp"
#include "fracsource/io.hpp"
#include "fracsource/pipeline.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fracsource;

namespace {

const char* kGoodConfig = R"({
  "alpha": 0.8, "hurst": 0.6, "T": 1.0,
  "grid": {"n": 64}, "modes": {"K": 3}, "paths": {"M": 200},
  "seed": 1, "threads": 1,
  "domain": {"type": "interval", "L": 1.0},
  "source": {
    "f": [1.0, 0.5, 0.25],
    "g": [1.0, 0.8, 0.6],
    "h": {"type": "constant", "value": 1.0, "lower_bound": 1.0}
  },
  "inverse": {"gamma": 0.5, "k_cut": 3},
  "output": {"dir": "out"}
})";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("frs_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

} // namespace

TEST_CASE("fmt17 round-trips doubles") {
  for (double v : {0.1, -3.14159265358979, 1e-300, 6.02214076e23, 0.0}) {
    const std::string s = io::fmt17(v);
    CHECK(io::parse_double(s) == v);
    CHECK(s.find(',') == std::string::npos);
  }
}

TEST_CASE("sha256 known vectors") {
  CHECK(io::sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(io::sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config parsing: good file and override precedence") {
  RunConfig cfg = parse_config(kGoodConfig);
  CHECK(cfg.sim.alpha == 0.8);
  CHECK(cfg.sim.K == 3);
  CHECK(cfg.source.f.size() == 3);
  CHECK(cfg.gamma == 0.5);
  const std::string h1 = cfg.config_hash();
  cfg.sim.seed = 99;
  CHECK(cfg.config_hash() != h1); // hash covers every field
}

TEST_CASE("config parsing rejects the standing-hypothesis violation with a message") {
  std::string bad = kGoodConfig;
  const auto pos = bad.find("0.6");
  bad.replace(pos, 3, "0.1"); // alpha + H = 0.9
  try {
    parse_config(bad);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("alpha + H > 1") != std::string::npos);
  }
}

TEST_CASE("config parsing rejects a missing lower bound on h") {
  std::string bad = kGoodConfig;
  const auto pos = bad.find(", \"lower_bound\": 1.0");
  bad.erase(pos, std::string(", \"lower_bound\": 1.0").size());
  CHECK_THROWS_AS(parse_config(bad), config_error);
}

TEST_CASE("config parsing rejects schema violations") {
  CHECK_THROWS_AS(parse_config("{"), config_error);
  CHECK_THROWS_AS(parse_config("{}"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"alpha": "x", "hurst": 0.6})"), config_error);
  std::string bad = kGoodConfig;
  bad.replace(bad.find("interval"), 8, "hexagon!");
  CHECK_THROWS_AS(parse_config(bad), config_error);
}

TEST_CASE("simulate writes stamped, reproducible artifacts") {
  TempDir tmp;
  RunConfig cfg = parse_config(kGoodConfig);
  cfg.sim.paths = 500;

  const auto dir1 = (tmp.path / "a").string();
  const auto dir2 = (tmp.path / "b").string();
  pipeline::run_simulate(cfg, dir1);
  auto cfg2 = cfg;
  cfg2.sim.threads = 2; // worker count must not change the bytes
  pipeline::run_simulate(cfg2, dir2);

  const std::string m1 = slurp(std::filesystem::path(dir1) / "ensemble_moments.csv");
  const std::string m2 = slurp(std::filesystem::path(dir2) / "ensemble_moments.csv");
  CHECK(!m1.empty());
  CHECK(m1 == m2);
  CHECK(m1.find("# seed=1") != std::string::npos);
  CHECK(m1.find("# config_sha256=") != std::string::npos);
  CHECK(m1.find("k,lambda,mean,se_mean,var,se_var") != std::string::npos);

  const std::string c1 = slurp(std::filesystem::path(dir1) / "covariance.csv");
  const std::string c2 = slurp(std::filesystem::path(dir2) / "covariance.csv");
  CHECK(c1 == c2);
  CHECK(std::filesystem::exists(std::filesystem::path(dir1) / "run_summary.json"));
}

TEST_CASE("reconstruct round-trips the simulate artifacts end to end") {
  TempDir tmp;
  RunConfig cfg = parse_config(kGoodConfig);
  cfg.sim.paths = 4000;
  cfg.sim.n = 128;
  const auto dir = tmp.path.string();
  pipeline::run_simulate(cfg, dir);
  pipeline::run_reconstruct(cfg, (tmp.path / "ensemble_moments.csv").string(),
                            (tmp.path / "covariance.csv").string(), dir);
  const std::string rec = slurp(tmp.path / "reconstruction.csv");
  CHECK(rec.find("k,lambda,f_hat,g_abs_hat,") != std::string::npos);
  // ground truth is in the config: errors should be small but nonzero
  const io::CsvTable t = io::read_csv((tmp.path / "reconstruction.csv").string());
  CHECK(t.rows.size() == 3);
  const double f1 = io::parse_double(t.rows[0][2]);
  CHECK(std::fabs(f1 - 1.0) < 0.2);
  CHECK(std::filesystem::exists(tmp.path / "reconstruction.json"));
}

TEST_CASE("reconstruct rejects malformed moment files") {
  TempDir tmp;
  RunConfig cfg = parse_config(kGoodConfig);
  const auto bad = tmp.path / "m.csv";
  io::write_text_file(bad.string(), "a,b\n1,2\n");
  CHECK_THROWS_AS(pipeline::run_reconstruct(cfg, bad.string(), "", tmp.path.string()),
                  config_error);
  CHECK_THROWS_AS(pipeline::run_reconstruct(cfg, (tmp.path / "nope.csv").string(), "",
                                            tmp.path.string()),
                  config_error);
}

TEST_CASE("instability artifact contains the decay table") {
  TempDir tmp;
  RunConfig cfg = parse_config(kGoodConfig);
  cfg.sim.alpha = 1.0;
  cfg.sim.hurst = 0.5;
  cfg.sim.K = 10;
  cfg.source.f.assign(10, 1.0);
  cfg.source.g.assign(10, 1.0);
  pipeline::run_instability(cfg, 0.5, tmp.path.string());
  const std::string txt = slurp(tmp.path / "instability.csv");
  CHECK(txt.find("k,lambda,t_star,A,B_kk,A_lambda,B_lambda_beta,amplification") !=
        std::string::npos);
  CHECK(txt.find("beta=") != std::string::npos);
  const io::CsvTable t = io::read_csv((tmp.path / "instability.csv").string());
  CHECK(t.rows.size() == 10);
}

TEST_CASE("selftest suites pass") { CHECK(pipeline::run_selftest(false)); }
