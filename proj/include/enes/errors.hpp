#pragma once

#include <stdexcept>
#include <string>

namespace enes {

// Bad or missing input data (files, dimensions, formats). CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure during computation (NaN gradients, unstable configs). CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace enes
