#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace pctnpi {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shared index name carries different dimensions in the two operands.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Unknown index name, duplicate name, or out-of-range position.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function (e.g. J(w) for w < 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : Error(what + " (achieved error estimate " + format(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  static std::string format(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
  }

  double achieved_;
};

/// Invalid run configuration (memory length, policy, parameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Brute-force evaluation refused because the path count exceeds the budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// Inconsistency that indicates a construction bug rather than bad input.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace pctnpi
