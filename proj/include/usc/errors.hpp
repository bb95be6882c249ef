// errors.hpp - exception types shared by all modules
#pragma once

#include <stdexcept>
#include <string>

namespace usc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Quadratic Hamiltonian has a non-real or non-positive normal frequency.
struct UnstableError : Error { using Error::Error; };
// Normal modes not unique (coincident frequencies).
struct DegenerateError : Error { using Error::Error; };
struct IntegrationFailure : Error { using Error::Error; };
struct NoUniqueSteadyState : Error { using Error::Error; };
struct UnphysicalState : Error { using Error::Error; };
// A printed closed form is singular at the requested parameters.
struct FormulaDomainError : Error { using Error::Error; };
struct DimensionTooLarge : Error { using Error::Error; };
struct DegenerateGaps : Error { using Error::Error; };
struct ConfigInvalid : Error { using Error::Error; };
struct OracleDiverged : Error { using Error::Error; };

} // namespace usc
