#pragma once

#include <stdexcept>
#include <string>

namespace cmcfol {

// Bad user input: invalid band limits, malformed config, unknown keys.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: non-finite data, non-convergent iterations.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// A linear operator failed the relative singular-value threshold.
// Carries the offending (near-zero) eigenvalue and, when meaningful,
// the spherical-harmonic degree that produced it.
class SingularOperatorError : public NumericError {
 public:
  SingularOperatorError(const std::string& what, double eigenvalue, int degree = -1)
      : NumericError(what), eigenvalue_(eigenvalue), degree_(degree) {}
  double eigenvalue() const { return eigenvalue_; }
  int degree() const { return degree_; }

 private:
  double eigenvalue_;
  int degree_;
};

// Geometric input became invalid: non-positive-definite metric, degenerate
// induced metric, graph below the horizon.
class ValidityError : public std::runtime_error {
 public:
  explicit ValidityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cmcfol
