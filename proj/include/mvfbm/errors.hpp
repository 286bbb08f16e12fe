#pragma once

#include <stdexcept>
#include <string>

namespace mvfbm {

/// Base of every error raised by the library. `exit_code()` is what the CLI
/// returns when the error escapes a subcommand.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

/// Bad arguments: precondition violations, malformed configs, regime checks.
class UsageError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// Argument outside the mathematical domain (negative time, H outside (0,1), ...).
class DomainError : public UsageError {
 public:
  using UsageError::UsageError;
};

class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// Numerical failure: Cholesky pivot, circulant embedding, moment blow-up.
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class CholeskyError : public NumericalError {
 public:
  CholeskyError(std::size_t pivot, double value)
      : NumericalError("Cholesky pivot " + std::to_string(pivot) +
                       " is not positive (" + std::to_string(value) + ")"),
        pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class EmbeddingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

}  // namespace mvfbm
