#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fracsource::io {

// Round-trippable decimal rendering (17 significant digits, '.' separator,
// locale-independent).
std::string fmt17(double v);

double parse_double(const std::string& s);

// SHA-256 hex digest; used to stamp artifacts with the configuration hash.
std::string sha256_hex(const std::string& bytes);

struct CsvTable {
  std::vector<std::string> comments; // '#'-prefixed lines, in order
  std::vector<std::string> header;   // first non-comment row
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

} // namespace fracsource::io
