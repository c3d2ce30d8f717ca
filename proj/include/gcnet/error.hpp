#pragma once

#include <stdexcept>
#include <string>

namespace gcnet {

// Invalid parameters or configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed input files (CLI exit code 3).
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// A construction postcondition failed; carries diagnostics (CLI exit code 4).
class ClaimViolation : public std::logic_error {
 public:
  explicit ClaimViolation(const std::string& what) : std::logic_error(what) {}
};

// Enumeration or state space larger than the configured guard.
class GuardError : public std::length_error {
 public:
  explicit GuardError(const std::string& what) : std::length_error(what) {}
};

}  // namespace gcnet
