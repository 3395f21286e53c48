#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gwlimits {

enum class Errc {
  NegativeMass,
  MassSumOutOfTolerance,
  Subcritical,
  Degenerate,
  OutsideUnitDisc,
  NotPowerOfTwo,
  VBeyondCap,
  EmptyConditioningEvent,
  InternalConsistency,
  BoettcherLaw,
  SchroederLaw,
  SAtOrBeyondOne,
  SOutOfRange,
  NoConvergence,
  VTooLarge,
  InvalidArgument,
  CapExceeded,
  CapTooSmall,
  NoSurvivors,
  AcceptanceTooLow,
  NoHits,
  ParseError,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::NegativeMass: return "NegativeMass";
    case Errc::MassSumOutOfTolerance: return "MassSumOutOfTolerance";
    case Errc::Subcritical: return "Subcritical";
    case Errc::Degenerate: return "Degenerate";
    case Errc::OutsideUnitDisc: return "OutsideUnitDisc";
    case Errc::NotPowerOfTwo: return "NotPowerOfTwo";
    case Errc::VBeyondCap: return "VBeyondCap";
    case Errc::EmptyConditioningEvent: return "EmptyConditioningEvent";
    case Errc::InternalConsistency: return "InternalConsistency";
    case Errc::BoettcherLaw: return "BoettcherLaw";
    case Errc::SchroederLaw: return "SchroederLaw";
    case Errc::SAtOrBeyondOne: return "SAtOrBeyondOne";
    case Errc::SOutOfRange: return "SOutOfRange";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::VTooLarge: return "VTooLarge";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::CapExceeded: return "CapExceeded";
    case Errc::CapTooSmall: return "CapTooSmall";
    case Errc::NoSurvivors: return "NoSurvivors";
    case Errc::AcceptanceTooLow: return "AcceptanceTooLow";
    case Errc::NoHits: return "NoHits";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Thrown by every fallible operation in the library. `code()` identifies
/// the failure; `what()` carries the code name plus context.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace gwlimits
