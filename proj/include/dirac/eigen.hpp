#pragma once

#include "dirac/models.hpp"

#include <string_view>
#include <utility>

namespace dirac {

enum class Branch { Plus, Minus };

/// Phase convention of the unnormalized eigenvector.
///  Standard:  V = (fz + s rho, fx + i fy)
///  Alternate: V = (fx - i fy, s rho - fz)
/// with s = +1 (Plus) or -1 (Minus). The two differ by a position-dependent phase and have
/// nodal lines on opposite sides of the degeneracy.
enum class Gauge { Standard, Alternate };

inline constexpr double branch_sign(Branch b) { return b == Branch::Plus ? 1.0 : -1.0; }
std::string_view to_string(Branch b);
std::string_view to_string(Gauge g);

/// Normalized-density threshold below which a point is treated as lying on a nodal line.
inline constexpr double kStringThreshold = 1e-6;

struct EigenPair {
    Branch branch = Branch::Plus;
    Gauge gauge = Gauge::Standard;
    double energy = 0.0;
    Spinor vector{};
    double rho = 0.0;
    /// (fx, fy, fz) at the evaluation point.
    Vec3 field{};
    bool on_string = false;
    bool degenerate = false;
};

/// Closed-form eigenpair for an already evaluated field vector.
EigenPair eigenpair_from_field(const Vec3& field, Branch branch, Gauge gauge = Gauge::Standard);
EigenPair eigenpair(const ModelSpec& model, const ParamPoint& r, Branch branch, Gauge gauge = Gauge::Standard);
/// (Plus, Minus) pair in the standard gauge.
std::pair<EigenPair, EigenPair> eigensystem(const ModelSpec& model, const ParamPoint& r);

/// |V|^2 / (2 rho)^2: 0 on the nodal line, 1 at the antipodal direction.
/// Throws DomainError(Degenerate) when rho == 0.
double normalized_density(const EigenPair& pair);

/// Re-expresses the pair in the other gauge (same eigenvalue, relocated nodal line).
EigenPair gauge_alternate(const EigenPair& pair);

/// rho + t, evaluated without cancellation, for |t| <= rho and perp2 = rho^2 - t^2.
double stable_rho_plus(double rho, double t, double perp2);

} // namespace dirac
