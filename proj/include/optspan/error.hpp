#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace optspan {

enum class ErrorCode {
  DimensionMismatch,
  NonPositiveProbability,
  NegativeUnderlying,
  InvalidArgument,
  EmptySequence,
  InvalidN,
  NotMeasurable,
  NegativeTarget,
  MissingOne,
  DegeneratePi,
  NotPositive,
  InconsistentPrices,
  FreeLunchPresent,
  NotDeterminedByArbitrage,
  MalformedProgram,
  ParseError,
  NumericalFailure,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveProbability: return "NonPositiveProbability";
    case ErrorCode::NegativeUnderlying: return "NegativeUnderlying";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::InvalidN: return "InvalidN";
    case ErrorCode::NotMeasurable: return "NotMeasurable";
    case ErrorCode::NegativeTarget: return "NegativeTarget";
    case ErrorCode::MissingOne: return "MissingOne";
    case ErrorCode::DegeneratePi: return "DegeneratePi";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::InconsistentPrices: return "InconsistentPrices";
    case ErrorCode::FreeLunchPresent: return "FreeLunchPresent";
    case ErrorCode::NotDeterminedByArbitrage: return "NotDeterminedByArbitrage";
    case ErrorCode::MalformedProgram: return "MalformedProgram";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace optspan
