#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace detplace {

/// One-based agent (bus) identifier, as used in case files and reports.
class Agent {
 public:
  constexpr Agent() = default;
  constexpr explicit Agent(int id) : id_(id) {}

  constexpr int id() const { return id_; }
  /// Zero-based position in vectors and matrices.
  constexpr int index() const { return id_ - 1; }
  static constexpr Agent from_index(int index) { return Agent(index + 1); }

  constexpr auto operator<=>(const Agent&) const = default;

 private:
  int id_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, Agent a) { return os << a.id(); }

enum class ErrorCode : std::uint8_t {
  kParse,
  kMissingColumn,
  kMissingParameter,
  kDisconnectedGraph,
  kNonPositiveParameter,
  kNonPositiveSusceptance,
  kAsymmetricEdge,
  kBadIndex,
  kInvalidSigma,
  kCertificateFailed,
  kObserverDesignFailed,
  kForbiddenAgent,
  kDegreeOverflow,
  kEmptyDetectionSet,
  kMethodDisagreement,
  kPoleAtFilter,
  kPencilFailure,
  kSolverFailure,
  kUnboundedRatio,
  kLPFailure,
  kInfiniteWorstFrequency,
  kStepTooLarge,
  kInvalidArgument,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace detplace
