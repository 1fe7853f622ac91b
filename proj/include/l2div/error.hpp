#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace l2div {

enum class ErrorCode {
  // input / data
  TooFewPoints,
  DuplicateAbscissae,
  DomainError,
  KnotOrderError,
  GridError,
  KernelError,
  DegenerateDesign,
  DimensionMismatch,
  LengthMismatch,
  ParseError,
  ConfigError,
  MissingReport,
  InvalidArgument,
  // numeric
  RankDeficientDesign,
  NonPSDPenalty,
  NegativeLambda,
  NonPositiveRho,
  ConvergenceFailure,
  AllPenalizedComponentsZero,
  InactiveFit,
  NonPositiveRSS,
  DivergenceExceedsN,
  FlatLossCurve,
  SingularSystem,
  ProblemTooLarge,
  SingularChart,
  NonPDFirstForm,
  InsufficientReplicates,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DuplicateAbscissae: return "DuplicateAbscissae";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::KnotOrderError: return "KnotOrderError";
    case ErrorCode::GridError: return "GridError";
    case ErrorCode::KernelError: return "KernelError";
    case ErrorCode::DegenerateDesign: return "DegenerateDesign";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MissingReport: return "MissingReport";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RankDeficientDesign: return "RankDeficientDesign";
    case ErrorCode::NonPSDPenalty: return "NonPSDPenalty";
    case ErrorCode::NegativeLambda: return "NegativeLambda";
    case ErrorCode::NonPositiveRho: return "NonPositiveRho";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::AllPenalizedComponentsZero: return "AllPenalizedComponentsZero";
    case ErrorCode::InactiveFit: return "InactiveFit";
    case ErrorCode::NonPositiveRSS: return "NonPositiveRSS";
    case ErrorCode::DivergenceExceedsN: return "DivergenceExceedsN";
    case ErrorCode::FlatLossCurve: return "FlatLossCurve";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ProblemTooLarge: return "ProblemTooLarge";
    case ErrorCode::SingularChart: return "SingularChart";
    case ErrorCode::NonPDFirstForm: return "NonPDFirstForm";
    case ErrorCode::InsufficientReplicates: return "InsufficientReplicates";
  }
  return "Unknown";
}

/// True for codes that describe bad input rather than a numerical failure.
constexpr bool is_data_error(ErrorCode code) {
  return code <= ErrorCode::InvalidArgument;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace l2div
