#pragma once

#include <stdexcept>
#include <string>

namespace fracsource {

// Raised when a run configuration (file, overrides, or in-memory struct)
// violates the model's standing hypotheses or the file schema.
class config_error : public std::runtime_error {
public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an internal numerical procedure cannot reach its accuracy
// target (series switchover, quadrature refinement, factorization).
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace fracsource
