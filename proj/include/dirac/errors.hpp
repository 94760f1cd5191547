#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dirac {

/// Machine-readable reasons for a numerical-domain failure.
enum class ErrorCode {
    OnString,           // input lies on the nodal line of the chosen eigenvector
    Degenerate,         // input is an energy degeneracy (rho == 0)
    LoopTouchesString,  // a loop or path sample lies on a nodal line
    RefineSteps,        // consecutive samples are too far apart to track a phase
    GapClosure,         // the spectral gap closes along an adiabatic sweep
    ComponentVanishes,  // selected spinor component is zero on a winding loop
    QuadratureRetries,  // flux quadrature could not avoid nodal points
    Unsupported,        // operation is not defined for this input shape
};

std::string_view to_string(ErrorCode code);

/// Raised when an operation is asked to evaluate at a singular or unresolvable point.
/// The CLI maps these to exit code 3; invalid arguments (std::invalid_argument) map to 2.
class DomainError : public std::runtime_error {
public:
    DomainError(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace dirac
