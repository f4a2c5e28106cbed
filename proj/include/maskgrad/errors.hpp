#pragma once

#include <stdexcept>
#include <string>

namespace maskgrad {

// Incompatible tensor shapes or dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf where a finite value is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Misuse of the computation graph (non-scalar root, double backward).
class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid user or file configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The scripted expert could not solve the configured task reliably.
class ExpertFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace maskgrad
