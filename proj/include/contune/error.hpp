#pragma once

#include <stdexcept>
#include <string>

namespace contune {

inline constexpr const char* kToolVersion = "0.1.0";

/// Error for configuration, contract and I/O failures. The message carries
/// enough context (document path, variable name, trial id) to act on.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace contune
