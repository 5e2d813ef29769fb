#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace semigroup_lab {

/// Base of every error raised by the library. The CLI maps `is_input_side()`
/// errors to exit code 2 and everything else to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual bool is_input_side() const noexcept { return true; }
};

/// Malformed arguments: shape mismatch, non-finite entries, bad grid, bad file.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A resolvent was requested at (or within the guard zone of) an eigenvalue.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, std::complex<double> eigenvalue)
      : Error(what), eigenvalue_(eigenvalue) {}
  std::complex<double> eigenvalue() const noexcept { return eigenvalue_; }

 private:
  std::complex<double> eigenvalue_;
};

/// An operation's precondition is numerically violated; carries the offending value.
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& what, double value) : Error(what), value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Result not representable in binary64 (e.g. exp of a huge generator).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A growth envelope could not be certified; carries the observed (t, norm) curve.
class CertificationError : public Error {
 public:
  CertificationError(const std::string& what, std::vector<std::pair<double, double>> curve)
      : Error(what), curve_(std::move(curve)) {}
  const std::vector<std::pair<double, double>>& curve() const noexcept { return curve_; }

 private:
  std::vector<std::pair<double, double>> curve_;
};

/// Numerical kernel failure (eigensolver non-convergence and the like).
class ComputationError : public Error {
 public:
  using Error::Error;
  bool is_input_side() const noexcept override { return false; }
};

}  // namespace semigroup_lab
