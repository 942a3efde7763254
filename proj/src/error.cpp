#include "infoflow/error.hpp"

namespace infoflow {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingCell: return "MissingCell";
    case ErrorKind::NonPositivePrice: return "NonPositivePrice";
    case ErrorKind::NonMonotoneDates: return "NonMonotoneDates";
    case ErrorKind::DuplicateTicker: return "DuplicateTicker";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::MalformedCsv: return "MalformedCsv";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::UnknownLink: return "UnknownLink";
    case ErrorKind::MixedUniverse: return "MixedUniverse";
    case ErrorKind::MixedScale: return "MixedScale";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::ZeroVarianceMarket: return "ZeroVarianceMarket";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::BadValue: return "BadValue";
    case ErrorKind::ConflictingSource: return "ConflictingSource";
    case ErrorKind::Io: return "Io";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::NonConvergence: return "NonConvergence";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) {
  return kind == ErrorKind::SingularDesign || kind == ErrorKind::NonConvergence;
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

Error Error::with_context(const std::string& context) const {
  Error e(kind_, "");
  static_cast<std::runtime_error&>(e) = std::runtime_error(context + ": " + what());
  return e;
}

}  // namespace infoflow
