#pragma once

#include "dirac/eigen.hpp"
#include "dirac/models.hpp"

namespace dirac {

/// Berry connection at a point. a_real is the physical vector potential; a_imag is the
/// imaginary part of i<V|grad V>/<V|V>, which is a pure gradient for unnormalized V.
struct ConnectionSample {
    ParamPoint at;
    Vec3 a_real;
    Vec3 a_imag;
    Branch branch = Branch::Plus;
    Gauge gauge = Gauge::Standard;
};

/// Closed form for the base model:
///   Plus:  A = (Y, -X, 0) / (2R(R+Z)),  Im = (X(2R+Z), Y(2R+Z), (R+Z)^2) / (2R^2(R+Z))
///   Minus: A = (Y, -X, 0) / (2R(R-Z)),  Im = (X(2R-Z), Y(2R-Z), -(R-Z)^2) / (2R^2(R-Z))
/// Throws DomainError on the branch's nodal line or at the origin.
ConnectionSample connection_analytic(const ParamPoint& r, Branch branch);

/// i<V|grad V>/<V|V> with grad V from central differences of step h on the eigenvector.
ConnectionSample connection_numeric(const ModelSpec& model, const ParamPoint& r, Branch branch, double h,
                                    Gauge gauge = Gauge::Standard);

/// i<V|grad V>/<V|V> with grad V obtained by differentiating the closed-form eigenvector
/// through the model's polynomial Jacobian. This is the connection used by line integrals
/// and curvature.
ConnectionSample berry_connection(const ModelSpec& model, const ParamPoint& r, Branch branch,
                                  Gauge gauge = Gauge::Standard);

/// Auto picks, per point, the gauge whose normalized density is at least 1/2, so the curl
/// stencil always sits far from that gauge's nodal line.
enum class GaugeChoice { Standard, Alternate, Auto };

/// Central-difference curl of the real connection. Throws DomainError at degeneracies, and
/// on the nodal line of a forced gauge.
Vec3 curvature(const ModelSpec& model, const ParamPoint& r, Branch branch, double h = 1e-4,
               GaugeChoice gauge = GaugeChoice::Auto);

struct FluxQuadrature {
    int polar_nodes = 64;       // Gauss-Legendre in cos(theta)
    int azimuthal_nodes = 128;  // trapezoid in phi
    /// Curl step relative to the local length scale of the connection at each node.
    double relative_step = 1e-5;
    double max_step = 1e-4;
    int max_retries = 3;
    GaugeChoice gauge = GaugeChoice::Auto;
};

struct MonopoleReport {
    ParamPoint center;
    double radius = 0.0;
    double charge = 0.0;  // flux / 4 pi
    double flux = 0.0;
    Branch branch = Branch::Plus;
    int quadrature_nodes = 0;
    int attempts = 0;  // 1 + number of axis re-tilts
    /// |charge - round(2 charge)/2|
    double quantization_residual = 0.0;
};

/// Flux of the curvature through a sphere, by Gauss-Legendre x trapezoid quadrature.
/// The polar axis starts along +Z and is re-tilted by golden-angle rotations whenever a
/// node lands on a nodal line or degeneracy.
MonopoleReport monopole_charge(const ModelSpec& model, const ParamPoint& center, double radius, Branch branch,
                               const FluxQuadrature& options = {});

} // namespace dirac
