#pragma once

#include <stdexcept>
#include <string>

namespace bolab {

/// Invalid construction parameters (grid sizes, nonpositive scales, ...).
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A call that violates the caller-side contract (mismatched grids, bad frames, ...).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite values entering or leaving a numerical operation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time stepping aborted (blow-up guard, seam guard, parameter window).
class EvolutionError : public std::runtime_error {
 public:
  EvolutionError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Newton iteration for the modulation parameters failed.
class DecompositionError : public std::runtime_error {
 public:
  DecompositionError(const std::string& what, int snapshot = -1)
      : std::runtime_error(what), snapshot_(snapshot) {}
  int snapshot() const { return snapshot_; }

 private:
  int snapshot_;
};

/// Iterative estimate stopped at its cap; carries the best estimate so far.
class DiagnosticError : public std::runtime_error {
 public:
  DiagnosticError(const std::string& what, double partial)
      : std::runtime_error(what), partial_(partial) {}
  double partial_estimate() const { return partial_; }

 private:
  double partial_;
};

/// A sweep produced no successful member.
class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bolab
