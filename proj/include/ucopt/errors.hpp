#pragma once

#include <stdexcept>
#include <string>

namespace ucopt {

/// Base class for all ucopt runtime failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input sizes do not match the declared model dimensions.
struct DimensionMismatch : Error {
  using Error::Error;
};

/// The baseline policy left the open interval between the input bounds.
struct AssumptionViolated : Error {
  using Error::Error;
};

/// A virtual input reached or exceeded its saturation scale.
struct SaturationExceeded : Error {
  using Error::Error;
};

/// The regularized normal equations are too ill-conditioned to solve.
struct RankDeficient : Error {
  using Error::Error;
};

/// The relative-velocity geometry is too close to the b2 singularity.
struct NearSingular : Error {
  using Error::Error;
};

/// Loiter radius collapsed to zero; Fisher quantities are undefined.
struct DegenerateGeometry : Error {
  using Error::Error;
};

/// A rollout produced a non-finite state.
struct DivergedTrajectory : Error {
  using Error::Error;
};

/// Malformed experiment configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace ucopt
