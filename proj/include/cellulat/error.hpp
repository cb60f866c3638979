#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cellulat {

enum class ErrorCode {
  UnknownSpecies,
  UnknownLevel,
  UnknownLigand,
  UnknownAgent,
  InsufficientQuantity,
  NegativeQuantity,
  FlagDomain,
  DuplicateInitializer,
  InvalidLesion,
  WindowInPast,
  InvalidArgument,
  InvalidModel,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSpecies: return "UnknownSpecies";
    case ErrorCode::UnknownLevel: return "UnknownLevel";
    case ErrorCode::UnknownLigand: return "UnknownLigand";
    case ErrorCode::UnknownAgent: return "UnknownAgent";
    case ErrorCode::InsufficientQuantity: return "InsufficientQuantity";
    case ErrorCode::NegativeQuantity: return "NegativeQuantity";
    case ErrorCode::FlagDomain: return "FlagDomain";
    case ErrorCode::DuplicateInitializer: return "DuplicateInitializer";
    case ErrorCode::InvalidLesion: return "InvalidLesion";
    case ErrorCode::WindowInPast: return "WindowInPast";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidModel: return "InvalidModel";
  }
  return "Unknown";
}

// Single exception type for the engine; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cellulat
