#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tubecert {

enum class ErrorCode {
  RankDeficient,
  NotOnManifold,
  SamplingFailed,
  NoConvergence,
  AmbiguousProjection,
  DerivativeUnstable,
  DimensionMismatch,
  MapLeavesManifold,
  BudgetDegenerate,
  ReferenceMapOffSlice,
  FiberEmpty,
  FiberAmbiguous,
  NonPositiveField,
  ParseError,
  InvalidScenario,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotOnManifold: return "NotOnManifold";
    case ErrorCode::SamplingFailed: return "SamplingFailed";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::AmbiguousProjection: return "AmbiguousProjection";
    case ErrorCode::DerivativeUnstable: return "DerivativeUnstable";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MapLeavesManifold: return "MapLeavesManifold";
    case ErrorCode::BudgetDegenerate: return "BudgetDegenerate";
    case ErrorCode::ReferenceMapOffSlice: return "ReferenceMapOffSlice";
    case ErrorCode::FiberEmpty: return "FiberEmpty";
    case ErrorCode::FiberAmbiguous: return "FiberAmbiguous";
    case ErrorCode::NonPositiveField: return "NonPositiveField";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
  }
  return "UnknownError";
}

/// Library-wide error type. `origin` names the subsystem that raised it so
/// pipeline failures can be traced back through the CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string origin, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + " [" + origin + "]: " + message),
        code_(code),
        origin_(std::move(origin)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& origin() const noexcept { return origin_; }

 private:
  ErrorCode code_;
  std::string origin_;
};

}  // namespace tubecert
