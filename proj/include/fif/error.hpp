#pragma once

#include <stdexcept>
#include <string>

namespace fif {

/// Invalid configuration or parameter combination (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or incompatible data: parse failures, grid or channel mismatch (CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fif
