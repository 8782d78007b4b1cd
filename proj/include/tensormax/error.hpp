#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tmax {

/// Base of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix shapes, tuple orders or index ranges that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A parameter outside its admissible range (df <= 2, reps = 0, q outside (0,1), ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A real-valued argument outside the domain of a formula (log log p <= 0, negative radicand).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Enumeration cost over the configured ceiling.
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, double estimated_cost)
      : Error(what), estimated_cost_(estimated_cost) {}
  double estimated_cost() const noexcept { return estimated_cost_; }

 private:
  double estimated_cost_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tmax
