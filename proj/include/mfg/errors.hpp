#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mfg {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate or inconsistent geometry (zero-area triangles, non-conforming connectivity).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; `line()` is 1-based, 0 when no single line is at fault.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Invalid parameters or a precondition the caller is responsible for.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// Factorization failure or residual check failure of a linear solve.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Iteration budget exhausted; carries the residual history that was observed.
class NonconvergenceError : public Error {
 public:
  NonconvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const noexcept { return history_; }
  double last_residual() const noexcept { return history_.empty() ? 0.0 : history_.back(); }

 private:
  std::vector<double> history_;
};

/// A structural property that must hold (PSD tensor, DMP, ...) was violated.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfg
