#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tagsiege {

enum class ErrorKind {
  Parse,
  Validation,
  Budget,
  PlanInconsistency,
  Shape,
  DegenerateInput,
  EmptyCorpus,
  Config,
  Template,
  IsolatedNode,
  RetrievalExhausted,
  Index,
  Backend,
  ResponseFormat,
  Training,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed input record; carries the 1-based line number of the offending record.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace tagsiege
