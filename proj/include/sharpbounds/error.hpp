#pragma once

#include <stdexcept>
#include <string>

namespace sharpbounds {

enum class ErrorCode {
  kInvalidBand,
  kInconsistentQuantile,
  kUnsupportedInfiniteCap,
  kInfeasible,
  kSeparation,
  kSingularDesign,
  kEmptySide,
  kUndefinedEstimand,
  kPropensityRange,
  kBootstrapUnstable,
  kColumn,
  kDomain,
  kParse,
  kConfig,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI and tests can dispatch on the kind rather than on message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidBand: return "invalid-band";
    case ErrorCode::kInconsistentQuantile: return "inconsistent-quantile";
    case ErrorCode::kUnsupportedInfiniteCap: return "unsupported-infinite-cap";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kSeparation: return "separation";
    case ErrorCode::kSingularDesign: return "singular-design";
    case ErrorCode::kEmptySide: return "empty-side";
    case ErrorCode::kUndefinedEstimand: return "undefined-estimand";
    case ErrorCode::kPropensityRange: return "propensity-range";
    case ErrorCode::kBootstrapUnstable: return "bootstrap-unstable";
    case ErrorCode::kColumn: return "column";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace sharpbounds
