#pragma once

#include <stdexcept>
#include <string>

namespace areal {

// Input or configuration violates a documented contract. CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical procedure cannot proceed (rank deficiency, divergence,
// degenerate geometry). CLI exit code 2.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem problems: missing files, unreadable or unwritable paths.
// CLI exit code 3.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace areal
