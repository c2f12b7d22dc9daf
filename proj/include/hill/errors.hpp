#pragma once

#include <stdexcept>
#include <string>

namespace hill {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LatticeMismatch : Error {
    using Error::Error;
};

// Carries the offending coefficient sum so callers can report the defect.
struct NormalizationError : Error {
    double defect;
    NormalizationError(const std::string& what, double d) : Error(what), defect(d) {}
};

struct SingularityError : Error {
    using Error::Error;
};

struct UndersampledGrid : Error {
    using Error::Error;
};

struct UnknownFamily : Error {
    using Error::Error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

// Spectrum too close to the integration rectangle, or the resolvent system is near singular.
struct ContourError : Error {
    using Error::Error;
};

struct NonIdempotent : Error {
    double defect;
    NonIdempotent(const std::string& what, double d) : Error(what), defect(d) {}
};

struct InsufficientData : Error {
    using Error::Error;
};

}  // namespace hill
