#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uclab {

enum class ErrorCode {
  invalid_input,
  outside_exterior_region,
  grid_too_coarse,
  weight_overflow,
  invalid_weight_params,
  domain_error,
  missing_derivative,
  range_mismatch,
  invalid_potential,
  not_inward_directed,
  mode_not_supported,
  invalid_cutoffs,
  region_out_of_grid,
  region_mismatch,
  gamma_sign_indefinite,
  insufficient_sequence,
  mostly_masked,
  unstable_step,
  domain_too_small,
  config_error,
  io_error,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "InvalidInput";
    case ErrorCode::outside_exterior_region: return "OutsideExteriorRegion";
    case ErrorCode::grid_too_coarse: return "GridTooCoarse";
    case ErrorCode::weight_overflow: return "WeightOverflow";
    case ErrorCode::invalid_weight_params: return "InvalidWeightParams";
    case ErrorCode::domain_error: return "DomainError";
    case ErrorCode::missing_derivative: return "MissingDerivative";
    case ErrorCode::range_mismatch: return "RangeMismatch";
    case ErrorCode::invalid_potential: return "InvalidPotential";
    case ErrorCode::not_inward_directed: return "NotInwardDirected";
    case ErrorCode::mode_not_supported: return "ModeNotSupported";
    case ErrorCode::invalid_cutoffs: return "InvalidCutoffs";
    case ErrorCode::region_out_of_grid: return "RegionOutOfGrid";
    case ErrorCode::region_mismatch: return "RegionMismatch";
    case ErrorCode::gamma_sign_indefinite: return "GammaSignIndefinite";
    case ErrorCode::insufficient_sequence: return "InsufficientSequence";
    case ErrorCode::mostly_masked: return "MostlyMasked";
    case ErrorCode::unstable_step: return "UnstableStep";
    case ErrorCode::domain_too_small: return "DomainTooSmall";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::io_error: return "IOError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace uclab
