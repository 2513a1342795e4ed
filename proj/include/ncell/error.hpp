#pragma once

#include <stdexcept>
#include <string>

namespace ncell {

enum class ErrorCode {
  DuplicateId,
  UnresolvedReference,
  DomainEmpty,
  ZeroDensity,
  InvalidCompartment,
  InvalidConfig,
  ParseError,
  NonFiniteState,
  UnstableIntegration,
  MissingNeuron,
  ShapeMismatch,
  NyquistViolation,
  SignalTooShort,
  EmptyBand,
  TooFewActive,
  InvalidFractions,
  ForbiddenEdge,
  Io,
};

const char* to_string(ErrorCode code);

// Every library failure is an Error carrying a code; the message names the
// offending entity.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse failures additionally carry a 1-based source location (0 = unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, std::size_t column,
             const std::string& what);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace ncell
