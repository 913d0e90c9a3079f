#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mominv {

/// Base of every error raised by the library. `stage()` names the pipeline
/// step that raised it when the error passed through `analyze`.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;

  const std::string& stage() const noexcept { return stage_; }
  void set_stage(std::string stage) { stage_ = std::move(stage); }

 private:
  std::string stage_;
};

/// Malformed input text (JSON network files, Matrix Market files).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The coefficient matrix of the moment equations is not of full row rank.
class AssumptionError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure in the finite state projection oracle.
class OracleError : public Error {
 public:
  using Error::Error;
};

}  // namespace mominv
