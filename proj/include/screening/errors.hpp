#pragma once

#include <stdexcept>
#include <string>

namespace screening {

// Every failure raised by the library derives from ScreeningError so callers
// (the CLI in particular) can map whole families of errors to exit codes.
class ScreeningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public ScreeningError {
 public:
  using ScreeningError::ScreeningError;
};

/// Density fell below the configured floor where a division by it is needed.
class DegenerateDensity : public ScreeningError {
 public:
  using ScreeningError::ScreeningError;
};

class QuadratureFailure : public ScreeningError {
 public:
  using ScreeningError::ScreeningError;
};

class NoSignChange : public ScreeningError {
 public:
  using ScreeningError::ScreeningError;
};

class BracketExhausted : public ScreeningError {
 public:
  using ScreeningError::ScreeningError;
};

class GridError : public ScreeningError {
 public:
  using ScreeningError::ScreeningError;
};

class SampleBudgetExceeded : public ScreeningError {
 public:
  using ScreeningError::ScreeningError;
};

/// Desk-scale limit of the brute-force oracle exceeded.
class BudgetExceeded : public ScreeningError {
 public:
  using ScreeningError::ScreeningError;
};

/// A solver produced a result that violates a proven property of the model.
class InvariantViolation : public ScreeningError {
 public:
  using ScreeningError::ScreeningError;
};

class ConfigError : public ScreeningError {
 public:
  using ScreeningError::ScreeningError;
};

}  // namespace screening
