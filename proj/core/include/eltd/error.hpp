#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eltd {

/// Failure categories. The CLI maps each category onto a stable exit code.
enum class ErrorKind {
  Config,         // bad or unknown configuration (exit 2)
  Data,           // malformed or inconsistent input data (exit 3)
  Numeric,        // divergence or non-finite values during fitting (exit 4)
  Compatibility,  // artifact/corpus axis mismatch (exit 5)
  Usage,          // precondition violated by the caller
};

/// Specific error codes, one per named failure mode.
enum class ErrorCode {
  OutOfRange,
  ParseError,
  DuplicateStation,
  UnknownStation,
  EmptyIntersection,
  InconsistentDimensions,
  NoObservations,
  DegeneratePath,
  OutOfExtent,
  NoElevationData,
  MissingMap,
  ConstantSeries,
  LengthMismatch,
  Empty,
  InsufficientGroups,
  DimensionMismatch,
  ConstantColumn,
  DegenerateDesign,
  DegenerateBank,
  EmptyBank,
  NonFiniteLoss,
  RankDeficient,
  InvalidArgument,
  ConfigError,
  AxisMismatch,
  SchemaError,
};

std::string_view to_string(ErrorCode code) noexcept;
ErrorKind kind_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_of(code_); }

private:
  ErrorCode code_;
};

}  // namespace eltd
