#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace burgers {

/// Base of every error thrown by the library. The CLI maps subclasses onto
/// distinct exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid grids, parameters or run configurations.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// A solver could not produce a valid state (non-finite values, refused step).
class SolverError : public Error {
public:
  using Error::Error;
};

/// A runtime monitor (maximum principle, energy ledger, ...) was violated.
class MonitorViolation : public Error {
public:
  using Error::Error;
};

/// An iteration did not reach its tolerance. Carries the residual history.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

private:
  std::vector<double> history_;
};

} // namespace burgers
