#pragma once

#include "fracsource/forward.hpp"

#include <string>

namespace fracsource {

// A full run description as loaded from the JSON config file. Flag overrides
// land here before validation; precedence is flags > file > defaults.
struct RunConfig {
  forward::SimConfig sim;
  forward::Domain domain = forward::Domain::interval(1.0);
  forward::SourceSpec source;

  double gamma = 0.5;      // instability split exponent
  int k_cut = 0;           // 0: use all K modes
  bool use_2gamma_h = false;
  std::string out_dir = "out";

  void validate() const;                 // throws config_error
  std::string canonical_json() const;    // sorted-key echo used for hashing
  std::string config_hash() const;       // sha256 of canonical_json
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

} // namespace fracsource
