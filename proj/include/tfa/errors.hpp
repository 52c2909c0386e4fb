#pragma once

#include <stdexcept>
#include <string>

namespace tfa {

// Error taxonomy mirrored by the CLI exit codes: io=2, validation=3, numerical=4.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tfa
