#pragma once

#include <stdexcept>
#include <string>

namespace tobitls {

/// A computation that is well-posed but failed numerically (non-convergence,
/// an indefinite information matrix, too many failed replications).
/// Contract violations use std::invalid_argument / std::domain_error instead.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The observed information is not positive definite.
class InformationError : public NumericalError {
 public:
  InformationError(const std::string& what, double min_eigenvalue)
      : NumericalError(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

}  // namespace tobitls
