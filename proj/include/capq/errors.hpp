#pragma once

#include <stdexcept>
#include <string>

namespace capq {

enum class Errc {
  config_error,
  lattice_too_coarse,
  empty_result,
  degenerate_range,
  zero_measure,
  bracket_too_wide,
  fattening_unresolved,
  resolution_exhausted,
  insufficient_samples,
  excluded_zone_dominance,
  shooting_bracket_failure,
  domain_error,
};

// Typed runtime error carrying one of the error codes above. The CLI maps
// config_error to exit status 2 and everything else to 1.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::config_error: return "config-error";
    case Errc::lattice_too_coarse: return "lattice-too-coarse";
    case Errc::empty_result: return "empty-result";
    case Errc::degenerate_range: return "degenerate-range";
    case Errc::zero_measure: return "zero-measure";
    case Errc::bracket_too_wide: return "bracket-too-wide";
    case Errc::fattening_unresolved: return "fattening-unresolved";
    case Errc::resolution_exhausted: return "resolution-exhausted";
    case Errc::insufficient_samples: return "insufficient-samples";
    case Errc::excluded_zone_dominance: return "excluded-zone-dominance";
    case Errc::shooting_bracket_failure: return "shooting-bracket-failure";
    case Errc::domain_error: return "domain-error";
  }
  return "unknown";
}

}  // namespace capq
