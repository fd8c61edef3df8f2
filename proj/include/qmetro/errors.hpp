#pragma once

#include <stdexcept>
#include <string>

namespace qmetro {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotHermitian : Error { using Error::Error; };
struct NotUnitary : Error { using Error::Error; };
struct NotNormalized : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct NumericalError : Error { using Error::Error; };
struct DegenerateExtremes : Error { using Error::Error; };
struct TrackingAmbiguity : Error { using Error::Error; };
struct WindowOverlap : Error { using Error::Error; };
struct InvalidPulseArea : Error { using Error::Error; };
struct DimMismatch : Error { using Error::Error; };
struct ZeroGap : Error { using Error::Error; };
struct ProjectionLoss : Error { using Error::Error; };
struct FringeAmbiguity : Error { using Error::Error; };
struct BelowThreshold : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace qmetro
