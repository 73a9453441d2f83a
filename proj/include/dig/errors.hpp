#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dig {

/// Broad failure classes. The CLI maps these onto exit codes: validation and
/// usage problems exit with 2, numerical failures with 1.
enum class ErrorClass { Validation, Numerical };

/// Base of every error the library throws. `code()` is a stable identifier
/// (e.g. "ColumnSumViolation") used in structured error output.
class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string code, const std::string& message)
      : std::runtime_error(message), class_(cls), code_(std::move(code)) {}

  ErrorClass error_class() const noexcept { return class_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorClass class_;
  std::string code_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string code, const std::string& message)
      : Error(ErrorClass::Validation, std::move(code), message) {}
};

class NumericalError : public Error {
 public:
  NumericalError(std::string code, const std::string& message)
      : Error(ErrorClass::Numerical, std::move(code), message) {}
};

/// Malformed model or environment file. `line` is 0 when unknown.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& field, std::size_t line, const std::string& message)
      : ValidationError("ParseError", message), field_(field), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

}  // namespace dig
