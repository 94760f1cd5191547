#pragma once

#include "dirac/eigen.hpp"
#include "dirac/loops.hpp"
#include "dirac/models.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace dirac {

enum class Method { LineIntegral, Wilson, FluxPrediction, Adiabatic };
std::string_view to_string(Method m);

struct PhaseResult {
    /// Continuously accumulated (unwrapped) phase in radians.
    double value = 0.0;
    /// value reduced into (-pi, pi].
    double principal = 0.0;
    Method method = Method::LineIntegral;
    std::string description;
    /// Quadrature error estimate (line integrals) or 0.
    double error_estimate = 0.0;

    double over_pi() const;
};

PhaseResult make_phase(double value, Method method, std::string description);

/// Adaptive Gauss-Kronrod line integral of the real connection around the loop.
/// Throws DomainError(LoopTouchesString) when the loop meets the nodal line of `gauge`.
PhaseResult loop_phase_line_integral(const ModelSpec& model, Branch branch, const LoopSpec& loop,
                                     Gauge gauge = Gauge::Standard);

/// Discrete holonomy -sum_k arg<V(R_k)|V(R_k+1)> over loop.nodes() samples. The principal
/// value is gauge invariant; the unwrapped value follows the chosen gauge.
/// Throws DomainError(RefineSteps) when a single step exceeds pi/2.
PhaseResult loop_phase_wilson(const ModelSpec& model, Branch branch, const LoopSpec& loop,
                              Gauge gauge = Gauge::Standard);

enum class Cap { Upper, Lower };

/// mu * (solid angle of the cap, signed by the right-hand rule) + 2 pi sum(m).
/// The loop must be a CircleZ on a sphere centered at `monopole`; strings_pierced lists the
/// signed charges of nodal lines crossing the chosen cap, relative to the loop orientation.
PhaseResult loop_phase_flux(double mu, const LoopSpec& loop, const std::vector<int>& strings_pierced,
                            Cap cap = Cap::Upper, const Vec3& monopole = {});

/// Open-path line integral of the real connection.
PhaseResult path_phase(const ModelSpec& model, Branch branch, const PathSpec& path, Gauge gauge = Gauge::Standard);

enum class Side { PlusY, MinusY };

struct DegeneratePathResult {
    PhaseResult phase;  // extrapolated to epsilon -> 0
    std::vector<double> epsilons;
    std::vector<double> samples;  // phase at each epsilon
    int order = 2;
};

/// Ladder 0.1 * 2^-k, k = 0..6.
std::vector<double> default_epsilon_ladder();

/// Phase along a straight path through the degeneracy, regularized by shifting it off-axis by
/// +-epsilon along Y and Richardson-extrapolating epsilon -> 0. Base model only.
DegeneratePathResult degenerate_path_phase(const ModelSpec& model, Branch branch, const PathSpec& axis_path, Side side,
                                           const std::vector<double>& epsilons, int order = 2);

struct WilsonSweepReport {
    double flux = 0.0;
    double charge = 0.0;
    int bands = 0;
    int nodes_per_loop = 0;
};

/// Monopole charge from Wilson loops alone: latitude circles swept from the north to the
/// south pole of a sphere, phases unwrapped band by band, and the polar remainder closed by
/// quadratic extrapolation. Independent of the curvature quadrature.
WilsonSweepReport charge_by_wilson_sweep(const ModelSpec& model, const ParamPoint& center, double radius, Branch branch,
                                         int bands = 128, int nodes_per_loop = 1024, Gauge gauge = Gauge::Standard);

} // namespace dirac
