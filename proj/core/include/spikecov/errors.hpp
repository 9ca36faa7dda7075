#pragma once

#include <stdexcept>
#include <string>

namespace spikecov {

// Base of every typed failure; what() names the offending quantity.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- input / model construction ----
struct NonPositiveEigenvalue : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct UnsortedInputRejected : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };  // config/JSON validation

// ---- deterministic-law solvers ----
struct PoleProximity : Error { using Error::Error; };
struct BracketFailure : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
struct WrongBranch : Error { using Error::Error; };
struct QuadratureFailure : Error { using Error::Error; };

// ---- spike predictions ----
struct InadmissibleSpike : Error { using Error::Error; };
struct WeightBoundViolation : Error { using Error::Error; };
struct Subcritical : Error { using Error::Error; };
struct InvalidPhi : Error { using Error::Error; };

// ---- simulation ----
struct EigensolverFailure : Error { using Error::Error; };
struct InsufficientGrid : Error { using Error::Error; };

}  // namespace spikecov
