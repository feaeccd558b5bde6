// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace nlsdecay {

// Raised when an input violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a numerical procedure cannot deliver a trustworthy result
// (singular factorization, non-convergence, underflow).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double last_residual, int iterations)
      : NumericError(what), last_residual_(last_residual), iterations_(iterations) {}

  double last_residual() const { return last_residual_; }
  int iterations() const { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

class SingularShiftError : public NumericError {
 public:
  SingularShiftError(const std::string& what, double condition_estimate)
      : NumericError(what), condition_estimate_(condition_estimate) {}

  double condition_estimate() const { return condition_estimate_; }

 private:
  double condition_estimate_;
};

}  // namespace nlsdecay
