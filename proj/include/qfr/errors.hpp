#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qfr {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or parameter outside the documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public DomainError {
 public:
  using DomainError::DomainError;
};

class DegenerateDesignError : public DomainError {
 public:
  using DomainError::DomainError;
};

class DegeneratePredictionError : public DomainError {
 public:
  using DomainError::DomainError;
};

// The fitted model cannot support the requested density (e.g. beta_hat <= 0).
class InferenceUnavailableError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Inputs that are individually valid but do not belong together.
class ConsistencyError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ParseError : public DomainError {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : DomainError(what + " (row " + std::to_string(row) + ", column " +
                    std::to_string(column) + ")"),
        row_(row),
        column_(column) {}
  explicit ParseError(const std::string& what) : DomainError(what) {}
  // Prefixes context (e.g. a file name) and keeps the location.
  ParseError(const std::string& context, const ParseError& inner)
      : DomainError(context + ": " + inner.what()), row_(inner.row_), column_(inner.column_) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_ = 0;
  std::size_t column_ = 0;
};

// Numerical procedure failed to reach its tolerance.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double best_estimate, double error_estimate)
      : Error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qfr
