#pragma once

#include <stdexcept>
#include <string>

namespace mixqcd {

/// Malformed or out-of-contract input data (bad CSV rows, too-small samples,
/// invalid parameters). Maps to CLI exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed to produce a usable answer. Maps to CLI exit
/// code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive quadrature hit its depth limit. Carries the partial estimate.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, double partial, double err)
      : NumericalError(what), partial_(partial), err_(err) {}
  double partial() const noexcept { return partial_; }
  double error_estimate() const noexcept { return err_; }

 private:
  double partial_;
  double err_;
};

}  // namespace mixqcd
