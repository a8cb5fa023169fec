#pragma once

#include <stdexcept>
#include <string>

namespace mvc {

// Error taxonomy used across the library. The C API maps each type to a
// status code; the CLI maps them to exit codes.

struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values or diverging optimization at runtime.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Misuse of the autodiff graph (non-scalar loss, repeated backward).
struct GraphError : std::runtime_error {
  explicit GraphError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mvc
