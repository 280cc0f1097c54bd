#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qnlab {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input data (dimension mismatch, unreadable trace).
class InputError : public Error {
 public:
  using Error::Error;
};

// Iterative reference solve failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Curvature pair with s'y <= 0 handed to the quasi-Newton update.
class CurvaturePairError : public Error {
 public:
  CurvaturePairError(const std::string& what, double sy) : Error(what), sy_(sy) {}
  double sy() const { return sy_; }

 private:
  double sy_;
};

// Symmetric factorization of a matrix that should be positive definite failed.
class SpdError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of a scalar function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Search direction is not a descent direction.
class NonDescentError : public Error {
 public:
  using Error::Error;
};

struct LineSearchTrial {
  double eta = 0.0;
  double eta_min = 0.0;  // bracket before the trial
  double eta_max = 0.0;
  double f = 0.0;
  double gd = 0.0;       // NaN when the gradient was not queried
  bool armijo = false;
  bool curvature = false;
};

// Line search left its admissible range or loop budget.
class BracketingError : public Error {
 public:
  BracketingError(const std::string& what, std::vector<LineSearchTrial> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<LineSearchTrial>& history() const { return history_; }

 private:
  std::vector<LineSearchTrial> history_;
};

}  // namespace qnlab
