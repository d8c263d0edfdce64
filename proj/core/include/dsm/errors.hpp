#pragma once

#include <stdexcept>
#include <string>

namespace dsm {

/// Bad parameters or malformed inputs (maps to CLI exit code 2).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure: factorization breakdown, divergence, non-finite
/// iterates (maps to CLI exit code 3).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// File-system or parse failure (maps to CLI exit code 4).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dsm
