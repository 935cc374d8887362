#pragma once

#include <stdexcept>
#include <string>

namespace latseek {

/// Base class for all domain errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonPositiveProbability : Error { using Error::Error; };
struct NotNormalized          : Error { using Error::Error; };
struct DegenerateKernel       : Error { using Error::Error; };
struct InvalidMean            : Error { using Error::Error; };
struct InvalidParams          : Error { using Error::Error; };
struct EmptySiteSet           : Error { using Error::Error; };
struct WindowTooSmall         : Error { using Error::Error; };
struct HorizonExceeded        : Error { using Error::Error; };
struct InsufficientData       : Error { using Error::Error; };
struct NoSeedFound            : Error { using Error::Error; };
struct QuadratureFailure      : Error { using Error::Error; };
struct EmptyInput             : Error { using Error::Error; };

} // namespace latseek
