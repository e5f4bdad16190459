#pragma once

#include <stdexcept>
#include <string>

namespace copo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameters : public Error {
 public:
  using Error::Error;
};

/// The pump is at or above the oscillation threshold, so the below-threshold
/// linearization does not apply. Carries the critical amplitude for reporting.
class AboveThreshold : public Error {
 public:
  AboveThreshold(const std::string& what, double eps_crit)
      : Error(what), eps_crit_(eps_crit) {}
  double eps_crit() const noexcept { return eps_crit_; }

 private:
  double eps_crit_;
};

class NoCrossing : public Error {
 public:
  using Error::Error;
};

class DetuningMismatch : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class SingularAtFrequency : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// A numerical postcondition (e.g. a projection that must be real) failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace copo
