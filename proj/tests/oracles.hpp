#pragma once

// Independent reference values for the test suites. Nothing here calls into the
// connection, holonomy or quadrature code under test.

#include "dirac/models.hpp"
#include "dirac/vec3.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <random>

namespace oracle {

using dirac::Vec3;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// atan(1 / 0.01), frozen from an independent evaluation.
inline constexpr double kArctan100 = 1.5607966601082315;

// Phase of a counterclockwise circle of latitude z on the unit sphere for the base model:
// -1/2 times the solid angle of the northern cap for the upper branch, and the same loop
// seen from the other branch's string (southern cap, charge +1/2, string through the north).
inline double base_plus_latitude_phase(double z) { return -kPi * (1.0 - z); }
inline double base_minus_latitude_phase(double z) { return -kPi * (1.0 + z); }

inline Vec3 monopole_field(double mu, const Vec3& r)
{
    const double R = dirac::norm(r);
    return r * (mu / (R * R * R));
}

// Flux of mu R / R^3 (monopole at the origin) through a flat disk, by a midpoint rule in
// polar coordinates on the disk.
inline double monopole_flux_through_disk(double mu, const Vec3& center, const Vec3& normal, double radius,
                                         int radial = 400, int angular = 400)
{
    const Vec3 n = normal / dirac::norm(normal);
    const Vec3 helper = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    Vec3 e1 = dirac::cross(helper, n);
    e1 = e1 / dirac::norm(e1);
    const Vec3 e2 = dirac::cross(n, e1);
    double total = 0.0;
    for (int i = 0; i < radial; ++i) {
        const double s = radius * (i + 0.5) / radial;
        for (int j = 0; j < angular; ++j) {
            const double t = 2.0 * kPi * (j + 0.5) / angular;
            const Vec3 p = center + s * (std::cos(t) * e1 + std::sin(t) * e2);
            total += dirac::dot(monopole_field(mu, p), n) * s;
        }
    }
    return total * (radius / radial) * (2.0 * kPi / angular);
}

// |H V - E V| for the 2x2 matrix built directly from the field components.
inline double eigen_residual(const Vec3& f, const dirac::Spinor& v, double energy)
{
    const std::complex<double> h00{f.z, 0.0};
    const std::complex<double> h01{f.x, -f.y};
    const std::complex<double> h10{f.x, f.y};
    const std::complex<double> h11{-f.z, 0.0};
    const auto r0 = h00 * v[0] + h01 * v[1] - energy * v[0];
    const auto r1 = h10 * v[0] + h11 * v[1] - energy * v[1];
    return std::sqrt(std::norm(r0) + std::norm(r1));
}

inline double relative_error(const Vec3& a, const Vec3& b) { return dirac::norm(a - b) / dirac::norm(b); }

// Central-difference curl of an arbitrary vector field.
inline Vec3 curl_of(const std::function<Vec3(const Vec3&)>& field, const Vec3& r, double h)
{
    using dirac::unit;
    auto d = [&](int j, int i) { return (field(r + h * unit(j))[i] - field(r - h * unit(j))[i]) / (2.0 * h); };
    return {d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)};
}

// Deterministic generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

    Vec3 point(double lo = -1.0, double hi = 1.0) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }

    // A point at least `clearance` away from the z axis and inside the cube.
    Vec3 off_axis_point(double clearance = 0.05, double lo = -1.0, double hi = 1.0)
    {
        while (true) {
            const Vec3 p = point(lo, hi);
            if (std::hypot(p.x, p.y) > clearance) return p;
        }
    }

    Vec3 unit_vector()
    {
        while (true) {
            const Vec3 p = point();
            const double n = dirac::norm(p);
            if (n > 0.1 && n <= 1.0) return p / n;
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace oracle
