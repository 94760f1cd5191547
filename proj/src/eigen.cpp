#include "dirac/eigen.hpp"
#include "dirac/errors.hpp"

#include <cmath>

namespace dirac {

std::string_view to_string(Branch b) { return b == Branch::Plus ? "plus" : "minus"; }
std::string_view to_string(Gauge g) { return g == Gauge::Standard ? "standard" : "alternate"; }

double stable_rho_plus(double rho, double t, double perp2)
{
    if (t >= 0.0) return rho + t;
    const double denom = rho - t;
    return denom > 0.0 ? perp2 / denom : 0.0;
}

EigenPair eigenpair_from_field(const Vec3& f, Branch branch, Gauge gauge)
{
    const double s = branch_sign(branch);
    const double rho = norm(f);
    const double perp2 = f.x * f.x + f.y * f.y;

    EigenPair p;
    p.branch = branch;
    p.gauge = gauge;
    p.energy = rho == 0.0 ? 0.0 : s * rho;
    p.rho = rho;
    p.field = f;
    if (gauge == Gauge::Standard) {
        // fz + s rho = s (rho + s fz)
        p.vector = {std::complex<double>{s * stable_rho_plus(rho, s * f.z, perp2), 0.0}, {f.x, f.y}};
    } else {
        // s rho - fz = s (rho - s fz)
        p.vector = {std::complex<double>{f.x, -f.y}, {s * stable_rho_plus(rho, -s * f.z, perp2), 0.0}};
    }
    p.degenerate = rho == 0.0;
    p.on_string = p.degenerate || norm2(p.vector) <= kStringThreshold * 4.0 * rho * rho;
    return p;
}

EigenPair eigenpair(const ModelSpec& model, const ParamPoint& r, Branch branch, Gauge gauge)
{
    return eigenpair_from_field(field_vector(model, r), branch, gauge);
}

std::pair<EigenPair, EigenPair> eigensystem(const ModelSpec& model, const ParamPoint& r)
{
    const Vec3 f = field_vector(model, r);
    return {eigenpair_from_field(f, Branch::Plus), eigenpair_from_field(f, Branch::Minus)};
}

double normalized_density(const EigenPair& pair)
{
    if (pair.rho == 0.0) throw DomainError(ErrorCode::Degenerate, "normalized density undefined at a degeneracy point");
    return norm2(pair.vector) / (4.0 * pair.rho * pair.rho);
}

EigenPair gauge_alternate(const EigenPair& pair)
{
    return eigenpair_from_field(pair.field, pair.branch,
                                pair.gauge == Gauge::Standard ? Gauge::Alternate : Gauge::Standard);
}

} // namespace dirac
