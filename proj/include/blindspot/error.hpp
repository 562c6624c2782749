#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blindspot {

enum class ErrorCode {
  // records / scenario
  DuplicateRecord,
  MissingCell,
  InvalidState,
  InvalidCycle,
  InvalidFraction,
  InvalidConfig,
  // series / correlation
  EmptySeries,
  LengthMismatch,
  InvalidHorizon,
  EmptyCandidates,
  // prediction
  MissingHistory,
  MaskMismatch,
  OutOfRange,
  EmptyKnownSet,
  // selection / evaluation
  InvalidProblem,
  TooManyNodes,
  ShapeMismatch,
  // io
  ParseError,
  IoError,
  Usage,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace blindspot
