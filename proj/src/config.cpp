#include "fracsource/config.hpp"

#include "fracsource/errors.hpp"
#include "fracsource/io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace fracsource {

namespace {

using nlohmann::json;

double require_number(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number())
    throw config_error("config: missing or non-numeric field '" + key + "'");
  return j[key].get<double>();
}

double number_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw config_error("config: non-numeric field '" + key + "'");
  return j[key].get<double>();
}

forward::TimeFunction parse_time_function(const json& j) {
  forward::TimeFunction h;
  if (!j.is_object()) throw config_error("config: source.h must be an object");
  const std::string type = j.value("type", "constant");
  if (!j.contains("lower_bound"))
    throw config_error("config: source.h.lower_bound (c_h) is required; the time "
                       "factor must be positive and bounded from below");
  h.lower_bound = require_number(j, "lower_bound");
  if (type == "constant") {
    h.type = forward::TimeFunction::Type::Constant;
    h.value = number_or(j, "value", 1.0);
  } else if (type == "sin_offset") {
    h.type = forward::TimeFunction::Type::SinOffset;
    h.offset = require_number(j, "offset");
    h.amplitude = require_number(j, "amplitude");
    h.frequency = require_number(j, "frequency");
  } else if (type == "samples") {
    h.type = forward::TimeFunction::Type::Samples;
    if (!j.contains("times") || !j.contains("values") || !j["times"].is_array() ||
        !j["values"].is_array())
      throw config_error("config: sampled h needs 'times' and 'values' arrays");
    for (const auto& v : j["times"]) h.times.push_back(v.get<double>());
    for (const auto& v : j["values"]) h.values.push_back(v.get<double>());
  } else {
    throw config_error("config: unknown h type '" + type + "'");
  }
  return h;
}

json time_function_json(const forward::TimeFunction& h) {
  json j;
  switch (h.type) {
    case forward::TimeFunction::Type::Constant:
      j["type"] = "constant";
      j["value"] = h.value;
      break;
    case forward::TimeFunction::Type::SinOffset:
      j["type"] = "sin_offset";
      j["offset"] = h.offset;
      j["amplitude"] = h.amplitude;
      j["frequency"] = h.frequency;
      break;
    case forward::TimeFunction::Type::Samples:
      j["type"] = "samples";
      j["times"] = h.times;
      j["values"] = h.values;
      break;
  }
  j["lower_bound"] = h.lower_bound;
  return j;
}

} // namespace

void RunConfig::validate() const {
  sim.validate();
  source.h.validate(sim.T);
  if (k_cut < 0 || k_cut > sim.K)
    throw config_error("config: k_cut must lie in [0, K]");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw config_error("config: gamma must lie in (0,1)");
  if (static_cast<int>(source.f.size()) > sim.K ||
      static_cast<int>(source.g.size()) > sim.K)
    throw config_error("config: more source coefficients than modes K");
}

std::string RunConfig::canonical_json() const {
  json j;
  j["alpha"] = sim.alpha;
  j["hurst"] = sim.hurst;
  j["T"] = sim.T;
  j["grid"]["n"] = sim.n;
  j["modes"]["K"] = sim.K;
  j["paths"]["M"] = sim.paths;
  j["seed"] = sim.seed;
  j["threads"] = sim.threads;
  if (domain.type == forward::Domain::Type::Interval) {
    j["domain"]["type"] = "interval";
    j["domain"]["L"] = domain.L;
  } else {
    j["domain"]["type"] = "rectangle";
    j["domain"]["Lx"] = domain.Lx;
    j["domain"]["Ly"] = domain.Ly;
  }
  j["source"]["f"] = source.f;
  j["source"]["g"] = source.g;
  j["source"]["h"] = time_function_json(source.h);
  j["quadrature"]["tol_moment"] = sim.tol_moment;
  j["quadrature"]["tol_kstar"] = sim.tol_kstar;
  j["inverse"]["gamma"] = gamma;
  j["inverse"]["k_cut"] = k_cut;
  j["inverse"]["use_gamma_2h"] = use_2gamma_h;
  j["output"]["dir"] = out_dir;
  return j.dump(); // nlohmann keeps object keys sorted
}

std::string RunConfig::config_hash() const { return io::sha256_hex(canonical_json()); }

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw config_error(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw config_error("config: top level must be an object");

  RunConfig cfg;
  cfg.sim.alpha = require_number(j, "alpha");
  cfg.sim.hurst = require_number(j, "hurst");
  cfg.sim.T = number_or(j, "T", 1.0);
  if (j.contains("grid")) cfg.sim.n = static_cast<int>(require_number(j["grid"], "n"));
  if (j.contains("modes")) cfg.sim.K = static_cast<int>(require_number(j["modes"], "K"));
  if (j.contains("paths"))
    cfg.sim.paths = static_cast<std::size_t>(require_number(j["paths"], "M"));
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      throw config_error("config: seed must be an integer");
    cfg.sim.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("threads")) cfg.sim.threads = j["threads"].get<int>();

  if (j.contains("domain")) {
    const auto& d = j["domain"];
    const std::string type = d.value("type", "interval");
    if (type == "interval")
      cfg.domain = forward::Domain::interval(number_or(d, "L", 1.0));
    else if (type == "rectangle")
      cfg.domain = forward::Domain::rectangle(number_or(d, "Lx", 1.0),
                                              number_or(d, "Ly", 1.0));
    else
      throw config_error("config: unknown domain type '" + type + "'");
  }

  if (!j.contains("source") || !j["source"].is_object())
    throw config_error("config: 'source' object is required");
  const auto& s = j["source"];
  if (s.contains("f")) {
    if (!s["f"].is_array()) throw config_error("config: source.f must be an array");
    for (const auto& v : s["f"]) cfg.source.f.push_back(v.get<double>());
  }
  if (!s.contains("g") || !s["g"].is_array())
    throw config_error("config: source.g array is required");
  for (const auto& v : s["g"]) cfg.source.g.push_back(v.get<double>());
  if (!s.contains("h")) throw config_error("config: source.h is required");
  cfg.source.h = parse_time_function(s["h"]);

  if (j.contains("quadrature")) {
    cfg.sim.tol_moment = number_or(j["quadrature"], "tol_moment", cfg.sim.tol_moment);
    cfg.sim.tol_kstar = number_or(j["quadrature"], "tol_kstar", cfg.sim.tol_kstar);
  }
  if (j.contains("inverse")) {
    const auto& inv = j["inverse"];
    cfg.gamma = number_or(inv, "gamma", cfg.gamma);
    cfg.k_cut = static_cast<int>(number_or(inv, "k_cut", 0.0));
    if (inv.contains("use_gamma_2h")) cfg.use_2gamma_h = inv["use_gamma_2h"].get<bool>();
  }
  if (j.contains("output") && j["output"].contains("dir"))
    cfg.out_dir = j["output"]["dir"].get<std::string>();

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

} // namespace fracsource
