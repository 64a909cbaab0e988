#pragma once

#include <stdexcept>
#include <string>

namespace cbpscan {

inline constexpr const char* kVersion = "1.0.0";

// Bad user input: unreadable or malformed files, inconsistent shapes, invalid
// configuration values. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Degenerate or unsupported numeric configuration discovered while computing
// (too few blocks, zero variance inside the scan window, ...). Exit code 3.
class ComputeError : public std::runtime_error {
 public:
  explicit ComputeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cbpscan
