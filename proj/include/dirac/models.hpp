#pragma once

#include "dirac/vec3.hpp"

#include <array>
#include <complex>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dirac {

/// coefficient * X^p0 * Y^p1 * Z^p2
struct Monomial {
    double coefficient = 0.0;
    std::array<int, 3> powers{};
};

/// A real trivariate polynomial stored as a list of monomials.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Monomial> terms);

    static Polynomial constant(double c);
    static Polynomial coordinate(int axis);
    /// prod_i (v - roots[i]) in the variable `axis`, expanded into monomials.
    static Polynomial from_roots(int axis, std::span<const double> roots);
    /// Parses expressions such as "X^3 - 0.5*X^2 + 2*Y*Z - 0.08".
    static Polynomial parse(std::string_view text);

    double operator()(const Vec3& r) const;
    Vec3 gradient(const Vec3& r) const;

    const std::vector<Monomial>& terms() const { return terms_; }
    std::string to_string() const;

private:
    std::vector<Monomial> terms_;
};

/// Substitution triple (fx, fy, fz) defining H(R) = [[fz, fx - i fy], [fx + i fy, -fz]].
struct ModelSpec {
    std::string name;
    Polynomial fx;
    Polynomial fy;
    Polynomial fz;
    std::map<std::string, double> params;
    /// false for user-supplied polynomials; reported in every result envelope.
    bool validated = true;

    static ModelSpec base();
    /// fz = Z^2 - z0^2. Requires z0 > 0.
    static ModelSpec z_quadratic(double z0);
    /// fx = (X - x1)(X - x2)(X - x3). Requires x1 < x2 < x3.
    static ModelSpec x_cubic(double x1, double x2, double x3);
    static ModelSpec custom(std::string name, Polynomial fx, Polynomial fy, Polynomial fz);

    /// Builds a built-in model by name ("base", "z-quadratic", "x-cubic"), filling in the
    /// reference parameters (Z0 = 0.5; X1, X2, X3 = -0.5, 0.2, 0.8) when absent.
    static ModelSpec from_name(std::string_view name, const std::map<std::string, double>& params = {});
};

/// Entries of a 2x2 complex matrix, row-major.
struct HermitianMatrix2 {
    std::array<std::complex<double>, 4> entries{};

    std::complex<double> operator()(int row, int col) const { return entries[2 * row + col]; }
    Spinor apply(const Spinor& v) const
    {
        return {entries[0] * v[0] + entries[1] * v[1], entries[2] * v[0] + entries[3] * v[1]};
    }
    /// Frobenius norm.
    double norm() const;
};

Vec3 field_vector(const ModelSpec& model, const ParamPoint& r);
/// Row a holds the gradient of the a-th field component.
Mat3 field_jacobian(const ModelSpec& model, const ParamPoint& r);
HermitianMatrix2 evaluate(const ModelSpec& model, const ParamPoint& r);
/// The base-model matrix for a given field vector.
HermitianMatrix2 matrix_from_field(const Vec3& f);

} // namespace dirac
