#include "ncell/error.hpp"

namespace ncell {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnresolvedReference: return "UnresolvedReference";
    case ErrorCode::DomainEmpty: return "DomainEmpty";
    case ErrorCode::ZeroDensity: return "ZeroDensity";
    case ErrorCode::InvalidCompartment: return "InvalidCompartment";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::UnstableIntegration: return "UnstableIntegration";
    case ErrorCode::MissingNeuron: return "MissingNeuron";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NyquistViolation: return "NyquistViolation";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::EmptyBand: return "EmptyBand";
    case ErrorCode::TooFewActive: return "TooFewActive";
    case ErrorCode::InvalidFractions: return "InvalidFractions";
    case ErrorCode::ForbiddenEdge: return "ForbiddenEdge";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

ParseError::ParseError(const std::string& file, std::size_t line, std::size_t column,
                       const std::string& what)
    : Error(ErrorCode::ParseError,
            file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

}  // namespace ncell
