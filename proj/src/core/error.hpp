#pragma once

#include <stdexcept>
#include <string>

namespace rdl {

// Invalid parameters, malformed configs, contract violations on inputs.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failures: rank deficiency, non-convergent iterations.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rdl
