#pragma once

#include <stdexcept>
#include <string>

namespace smudge {

/// Base class for all errors raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or schema rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input file could not be parsed. Message carries line/field context.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace smudge
