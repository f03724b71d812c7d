#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace grf {

enum class Errc {
  InvalidArgument,
  DuplicateOffset,
  OppositeOffsetPresent,
  DimensionMismatch,
  UnknownOffset,
  DomainTooLarge,
  MissingAppearance,
  IncompatibleModels,
  OutOfDomain,
  ClampConflict,
  InvalidLabel,
  ChannelMismatch,
  IncompatibleStatistics,
  CandidateInStructure,
  RangeExhausted,
  MappingMismatch,
  IncompatibleIndexing,
  IncompatibleDomains,
  MalformedHeader,
  LabelOutOfRange,
  PlacementFailure,
  IoFailure,
};

std::string_view errc_name(Errc code) noexcept;

/// Thrown by every library operation on contract violation.  The code is
/// stable and machine-readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DuplicateOffset: return "DuplicateOffset";
    case Errc::OppositeOffsetPresent: return "OppositeOffsetPresent";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::UnknownOffset: return "UnknownOffset";
    case Errc::DomainTooLarge: return "DomainTooLarge";
    case Errc::MissingAppearance: return "MissingAppearance";
    case Errc::IncompatibleModels: return "IncompatibleModels";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::ClampConflict: return "ClampConflict";
    case Errc::InvalidLabel: return "InvalidLabel";
    case Errc::ChannelMismatch: return "ChannelMismatch";
    case Errc::IncompatibleStatistics: return "IncompatibleStatistics";
    case Errc::CandidateInStructure: return "CandidateInStructure";
    case Errc::RangeExhausted: return "RangeExhausted";
    case Errc::MappingMismatch: return "MappingMismatch";
    case Errc::IncompatibleIndexing: return "IncompatibleIndexing";
    case Errc::IncompatibleDomains: return "IncompatibleDomains";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::PlacementFailure: return "PlacementFailure";
    case Errc::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace grf
