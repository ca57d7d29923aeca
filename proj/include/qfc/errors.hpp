#pragma once

#include <stdexcept>
#include <string>

namespace qfc {

/// Invalid configuration or argument; maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input for which a quantity is undefined (all-zero field, singular matrix).
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// NaN/Inf produced by a time integrator; maps to exit code 3.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step)
      : std::runtime_error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// Linearized analysis requested on an unstable background; exit code 4.
class StabilityError : public std::runtime_error {
 public:
  StabilityError(const std::string& what, double max_real_eigenvalue)
      : std::runtime_error(what), max_re_(max_real_eigenvalue) {}
  double max_real_eigenvalue() const noexcept { return max_re_; }

 private:
  double max_re_;
};

/// Nearly coincident singular values where a quotient formula would divide by ~0.
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Factorization failed its own reconstruction check.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No real steady state exists for the requested branch.
class BelowOscillationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace qfc
