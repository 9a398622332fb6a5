#include "waam/error.hpp"

namespace waam {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::Io: return "io";
    case ErrorCode::MalformedInput: return "malformed-input";
    case ErrorCode::Degenerate: return "degenerate";
    case ErrorCode::NoIntersection: return "no-intersection";
    case ErrorCode::RunawayGuard: return "runaway-guard";
    case ErrorCode::JointLimit: return "joint-limit";
    case ErrorCode::Syntax: return "syntax";
    case ErrorCode::Unbalanced: return "unbalanced";
    case ErrorCode::UnknownReference: return "unknown-reference";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::NotFound: return "not-found";
    case ErrorCode::PlanExhausted: return "plan-exhausted";
    case ErrorCode::InsufficientCoverage: return "insufficient-coverage";
    case ErrorCode::EmptyResult: return "empty-result";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

ParseError::ParseError(ErrorCode code, std::size_t line, std::size_t column,
                       const std::string& message)
    : Error(code, "line " + std::to_string(line) + ", column " + std::to_string(column) +
                      ": " + message),
      line_(line),
      column_(column) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace waam
