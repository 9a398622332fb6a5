#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace waam {

enum class ErrorCode {
  InvalidArgument,
  Io,
  MalformedInput,
  Degenerate,
  NoIntersection,
  RunawayGuard,
  JointLimit,
  Syntax,
  Unbalanced,
  UnknownReference,
  Unsupported,
  NotFound,
  PlanExhausted,
  InsufficientCoverage,
  EmptyResult,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; `code()` tells the
// caller which contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Script diagnostics carry a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t line, std::size_t column,
             const std::string& message);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace waam
