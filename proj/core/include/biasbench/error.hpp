#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace biasbench {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed template, expression or data file. `position` is a byte offset
/// into `field` (or into the whole document when `field` is empty).
class ParseError : public Error {
 public:
  ParseError(std::string message, std::string field, std::size_t position);

  const std::string& message() const { return message_; }
  const std::string& field() const { return field_; }
  std::size_t position() const { return position_; }

 private:
  std::string message_;
  std::string field_;
  std::size_t position_;
};

/// A well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Failure while evaluating a numeric expression or filling a template.
class EvalError : public Error {
 public:
  using Error::Error;
};

}  // namespace biasbench
