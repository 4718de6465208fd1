#pragma once

#include <stdexcept>
#include <string>

namespace sparse_lsq {

// Base of every error raised by the library. The CLI maps subclasses onto
// exit codes, so new error kinds should derive from the closest category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied bad input: shapes, ranges, files. Exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

class NonFiniteError : public InputError {
 public:
  using InputError::InputError;
};

class RankError : public InputError {
 public:
  using InputError::InputError;
};

class BudgetError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class PreconditionError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : InputError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Numerical machinery broke down. Exit code 1.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IterationFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BarrierViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DivisionDegeneracy : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// No column satisfies U(e_i) <= L(v_i) at some step. The theory rules this
// out, so seeing it means a bug in the sampler.
class InfeasibleStep : public NumericalError {
 public:
  InfeasibleStep(int step, double max_gap)
      : NumericalError("deterministic sampling infeasible at step " + std::to_string(step) +
                       " (max L - U gap " + std::to_string(max_gap) + ")"),
        step_(step),
        max_gap_(max_gap) {}

  int step() const noexcept { return step_; }
  double max_gap() const noexcept { return max_gap_; }

 private:
  int step_;
  double max_gap_;
};

}  // namespace sparse_lsq
