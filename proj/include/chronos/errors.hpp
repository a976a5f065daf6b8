#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace chronos {

/// Stable error codes; the CLI and the scenario golden tests key on these.
enum class Errc {
  // operator / projector validation
  NotHermitian,
  NotIdempotent,
  NonIntegerTrace,
  DimensionMismatch,
  ZeroVector,
  NonCommuting,
  NotUnitary,
  NotDensityMatrix,
  UnknownTime,
  // histories
  NotASuperset,
  NotAProjectorProduct,
  ZeroConditionWeight,
  // decompositions
  NotOrthogonal,
  IncompleteSum,
  OwnerMismatch,
  InconsistentInput,
  // probability / reasoning
  NegativeProbability,
  NotNormalized,
  PositiveOnZeroWeight,
  NotARefinement,
  NonCommutingFrameworks,
  InconsistentRefinement,
  IncompatibleData,
  ZeroWeightData,
  // scenario language
  SyntaxError,
  DuplicateIdentifier,
  UnknownIdentifier,
  NonUnitaryDynamics,
  InconsistentFramework,
  ElementNotInFramework,
  DimensionCap,
  // cli
  IoError,
};

const char* errc_name(Errc c);

/// Location inside a scenario source document, 1-based.
struct SourceSpan {
  int line = 0;
  int column = 0;
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        message_(std::move(message)) {}
  Error(Errc code, std::string message, SourceSpan span)
      : std::runtime_error(std::string(errc_name(code)) + " at line " + std::to_string(span.line) +
                           ", column " + std::to_string(span.column) + ": " + message),
        code_(code),
        message_(std::move(message)),
        span_(span) {}

  Errc code() const { return code_; }
  const std::string& message() const { return message_; }
  const std::optional<SourceSpan>& span() const { return span_; }

 private:
  Errc code_;
  std::string message_;
  std::optional<SourceSpan> span_;
};

}  // namespace chronos
