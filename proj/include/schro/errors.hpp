#pragma once

#include <stdexcept>
#include <string>

namespace schro {

// Error categories map one-to-one onto CLI exit codes (see tools/schro_cli.cpp).
enum class ErrorKind {
  InvalidInput,            // bad arguments or violated preconditions
  ParametersInadmissible,  // parameters fail a construction hypothesis
  NumericFailure,          // overflow, non-convergence of a solver
  SpectralRegime,          // energy not in the uniformly hyperbolic regime
  IllConditioned,          // evaluation point too close to a pole/eigenvalue
  Internal,                // a guarantee failed under validated params
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::ParametersInadmissible: return "parameters-inadmissible";
    case ErrorKind::NumericFailure: return "numeric-failure";
    case ErrorKind::SpectralRegime: return "spectral-regime-error";
    case ErrorKind::IllConditioned: return "ill-conditioned-error";
    case ErrorKind::Internal: return "internal-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorKind::InvalidInput, what);
}

}  // namespace schro
