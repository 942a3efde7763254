#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace infoflow {

enum class ErrorKind {
  // input / validation
  MissingCell,
  NonPositivePrice,
  NonMonotoneDates,
  DuplicateTicker,
  TooFewRows,
  MalformedCsv,
  KTooLarge,
  ZeroVarianceColumn,
  DimensionMismatch,
  TooShort,
  UnknownLink,
  MixedUniverse,
  MixedScale,
  WindowTooShort,
  DegenerateSample,
  ZeroVarianceMarket,
  UnknownKey,
  BadValue,
  ConflictingSource,
  Io,
  // numerical
  SingularDesign,
  NonConvergence,
};

std::string_view to_string(ErrorKind kind);

// Non-convergence and singular systems are numerical failures; everything
// else is an input problem.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

  // Returns a copy whose message is prefixed with `context`.
  Error with_context(const std::string& context) const;

 private:
  ErrorKind kind_;
};

}  // namespace infoflow
