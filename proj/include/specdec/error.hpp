#pragma once

#include <stdexcept>
#include <string>

namespace specdec {

/// Malformed or schema-violating input (config files, CSV tables, CLI flags).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An optimization target that no configuration in the searched space reaches.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace specdec
