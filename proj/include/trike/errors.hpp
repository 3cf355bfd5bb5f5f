#pragma once

#include <stdexcept>
#include <string>

namespace trike {

/// Base class for every error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- system construction / analysis ---
struct ImproperSystem : Error { using Error::Error; };
struct ZeroDenominator : Error { using Error::Error; };
struct NegativeDeadTime : Error { using Error::Error; };
struct UnsupportedOrder : Error { using Error::Error; };
struct PoleOnAxis : Error { using Error::Error; };

// --- discretization ---
struct FractionalDelay : Error { using Error::Error; };
struct NonpositiveSampleTime : Error { using Error::Error; };
struct BilinearSingularity : Error { using Error::Error; };
struct SampleTimeMismatch : Error { using Error::Error; };

// --- response analysis ---
struct NotSettled : Error { using Error::Error; };

// --- controller design ---
struct NonpositiveRiseTime : Error { using Error::Error; };
struct PlantZeroGain : Error { using Error::Error; };
struct ThetaOutOfRange : Error { using Error::Error; };

// --- identification / spectra ---
struct InsufficientExcitation : Error { using Error::Error; };
struct SingularRegression : Error { using Error::Error; };
struct TooShort : Error { using Error::Error; };
struct BinMisalignment : Error { using Error::Error; };

// --- kinematics ---
struct DegenerateSpeed : Error { using Error::Error; };
struct HorizonNonpositive : Error { using Error::Error; };
struct SteerSaturated : Error { using Error::Error; };

// --- simulation / plumbing ---
struct ConfigMismatch : Error { using Error::Error; };
struct DutyOutOfRange : Error { using Error::Error; };
struct NegativeVoltage : Error { using Error::Error; };
struct MalformedCsv : Error { using Error::Error; };

}  // namespace trike
