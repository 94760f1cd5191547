#include "dirac/gauge.hpp"
#include "dirac/errors.hpp"
#include "dirac/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace dirac {

namespace {

[[noreturn]] void throw_singular(const EigenPair& pair, const ParamPoint& r)
{
    std::ostringstream os;
    os << "(" << format_double(r.x) << ", " << format_double(r.y) << ", " << format_double(r.z) << ") is ";
    if (pair.degenerate) {
        os << "a degeneracy point";
        throw DomainError(ErrorCode::Degenerate, os.str());
    }
    os << "on the " << to_string(pair.branch) << " nodal line (" << to_string(pair.gauge) << " gauge)";
    throw DomainError(ErrorCode::OnString, os.str());
}

ConnectionSample from_overlaps(const ParamPoint& r, const EigenPair& pair, const std::array<Spinor, 3>& dv)
{
    const double n2 = norm2(pair.vector);
    ConnectionSample out{r, {}, {}, pair.branch, pair.gauge};
    for (int i = 0; i < 3; ++i) {
        const std::complex<double> o = inner(pair.vector, dv[static_cast<std::size_t>(i)]);
        // i <V|dV> / <V|V>
        out.a_real[i] = -o.imag() / n2;
        out.a_imag[i] = o.real() / n2;
    }
    return out;
}

Vec3 column(const Mat3& j, int i) { return {j[0][i], j[1][i], j[2][i]}; }

double frobenius(const Mat3& j) { return std::sqrt(dot(j[0], j[0]) + dot(j[1], j[1]) + dot(j[2], j[2])); }

} // namespace

ConnectionSample connection_analytic(const ParamPoint& r, Branch branch)
{
    const EigenPair pair = eigenpair_from_field(r, branch);
    if (pair.on_string) throw_singular(pair, r);
    const double s = branch_sign(branch);
    const double R = pair.rho;
    const double denom = stable_rho_plus(R, s * r.z, r.x * r.x + r.y * r.y);  // R + sZ
    ConnectionSample out{r, {}, {}, branch, Gauge::Standard};
    out.a_real = Vec3{r.y, -r.x, 0.0} / (2.0 * R * denom);
    const double k = 2.0 * R + s * r.z;
    out.a_imag = Vec3{r.x * k, r.y * k, s * denom * denom} / (2.0 * R * R * denom);
    return out;
}

ConnectionSample connection_numeric(const ModelSpec& model, const ParamPoint& r, Branch branch, double h, Gauge gauge)
{
    if (!(h > 0.0 && h <= 1e-3)) throw std::invalid_argument("connection_numeric needs 0 < h <= 1e-3");
    const EigenPair pair = eigenpair(model, r, branch, gauge);
    if (pair.on_string) throw_singular(pair, r);
    std::array<Spinor, 3> dv{};
    for (int i = 0; i < 3; ++i) {
        const Spinor plus = eigenpair(model, r + h * unit(i), branch, gauge).vector;
        const Spinor minus = eigenpair(model, r - h * unit(i), branch, gauge).vector;
        for (std::size_t c = 0; c < 2; ++c) dv[static_cast<std::size_t>(i)][c] = (plus[c] - minus[c]) / (2.0 * h);
    }
    return from_overlaps(r, pair, dv);
}

ConnectionSample berry_connection(const ModelSpec& model, const ParamPoint& r, Branch branch, Gauge gauge)
{
    const Vec3 f = field_vector(model, r);
    const EigenPair pair = eigenpair_from_field(f, branch, gauge);
    if (pair.on_string) throw_singular(pair, r);
    const Mat3 jac = field_jacobian(model, r);
    const double s = branch_sign(branch);
    std::array<Spinor, 3> dv{};
    for (int i = 0; i < 3; ++i) {
        const Vec3 df = column(jac, i);
        const double drho = dot(f, df) / pair.rho;
        auto& d = dv[static_cast<std::size_t>(i)];
        if (gauge == Gauge::Standard) {
            d = {std::complex<double>{df.z + s * drho, 0.0}, {df.x, df.y}};
        } else {
            d = {std::complex<double>{df.x, -df.y}, {s * drho - df.z, 0.0}};
        }
    }
    return from_overlaps(r, pair, dv);
}

namespace {

Gauge resolve_gauge(const EigenPair& standard, GaugeChoice choice)
{
    switch (choice) {
    case GaugeChoice::Standard: return Gauge::Standard;
    case GaugeChoice::Alternate: return Gauge::Alternate;
    case GaugeChoice::Auto: break;
    }
    return normalized_density(standard) >= 0.5 ? Gauge::Standard : Gauge::Alternate;
}

Vec3 curl_of_connection(const ModelSpec& model, const ParamPoint& r, Branch branch, Gauge gauge, double h)
{
    std::array<Vec3, 3> forward{};
    std::array<Vec3, 3> backward{};
    try {
        for (int j = 0; j < 3; ++j) {
            forward[static_cast<std::size_t>(j)] = berry_connection(model, r + h * unit(j), branch, gauge).a_real;
            backward[static_cast<std::size_t>(j)] = berry_connection(model, r - h * unit(j), branch, gauge).a_real;
        }
    } catch (const DomainError& e) {
        throw DomainError(e.code(), std::string("curvature stencil: ") + e.what());
    }
    // d[j][i] = dA_i / dX_j
    auto d = [&](int j, int i) {
        return (forward[static_cast<std::size_t>(j)][i] - backward[static_cast<std::size_t>(j)][i]) / (2.0 * h);
    };
    return {d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)};
}

} // namespace

Vec3 curvature(const ModelSpec& model, const ParamPoint& r, Branch branch, double h, GaugeChoice choice)
{
    if (!(h > 0.0)) throw std::invalid_argument("curvature needs h > 0");
    const EigenPair standard = eigenpair(model, r, branch);
    if (standard.degenerate) throw_singular(standard, r);
    const Gauge gauge = resolve_gauge(standard, choice);
    const EigenPair pair = gauge == Gauge::Standard ? standard : gauge_alternate(standard);
    if (pair.on_string) throw_singular(pair, r);
    return curl_of_connection(model, r, branch, gauge, h);
}

MonopoleReport monopole_charge(const ModelSpec& model, const ParamPoint& center, double radius, Branch branch,
                               const FluxQuadrature& options)
{
    if (!(radius > 0.0)) throw std::invalid_argument("monopole_charge needs a positive radius");
    if (options.polar_nodes < 2 || options.azimuthal_nodes < 3)
        throw std::invalid_argument("monopole_charge needs at least 2 x 3 quadrature nodes");
    const GaussLegendreRule rule = gauss_legendre(options.polar_nodes);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    const std::size_t n_phi = static_cast<std::size_t>(options.azimuthal_nodes);
    const std::size_t total = rule.nodes.size() * n_phi;
    const double dphi = kTwoPi / static_cast<double>(n_phi);

    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
        // Polar axis rotated about X by attempt * golden angle; azimuth offset likewise.
        const double alpha = attempt * golden;
        const Vec3 e1{1.0, 0.0, 0.0};
        const Vec3 e2{0.0, std::cos(alpha), std::sin(alpha)};
        const Vec3 e3{0.0, -std::sin(alpha), std::cos(alpha)};
        const double phi0 = attempt * golden;

        std::vector<double> contributions(total, 0.0);
        std::vector<char> rejected(total, 0);
        parallel_for(total, [&](std::size_t idx) {
            const std::size_t i = idx / n_phi;
            const std::size_t j = idx % n_phi;
            const double u = rule.nodes[i];
            const double sin_t = std::sqrt(std::max(0.0, 1.0 - u * u));
            const double phi = phi0 + dphi * (static_cast<double>(j) + 0.5);
            const Vec3 dir = sin_t * std::cos(phi) * e1 + sin_t * std::sin(phi) * e2 + u * e3;
            const Vec3 p = center + radius * dir;

            const EigenPair standard = eigenpair(model, p, branch);
            if (standard.rho < kStringThreshold) {
                rejected[idx] = 1;
                return;
            }
            const Gauge gauge = resolve_gauge(standard, options.gauge);
            const EigenPair pair = gauge == Gauge::Standard ? standard : gauge_alternate(standard);
            const double density = normalized_density(pair);
            if (density < kStringThreshold) {
                rejected[idx] = 1;
                return;
            }
            // Length scale over which the connection varies near this node.
            const double jac = std::max(frobenius(field_jacobian(model, p)), 1e-300);
            const double scale = pair.rho * std::sqrt(density) / jac;
            const double h = std::min(options.max_step, options.relative_step * scale);
            try {
                const Vec3 b = curl_of_connection(model, p, branch, gauge, h);
                contributions[idx] = rule.weights[i] * dphi * radius * radius * dot(b, dir);
            } catch (const DomainError&) {
                rejected[idx] = 1;
            }
        });
        if (std::any_of(rejected.begin(), rejected.end(), [](char c) { return c != 0; })) continue;

        MonopoleReport report;
        report.center = center;
        report.radius = radius;
        report.branch = branch;
        report.flux = pairwise_sum(contributions);
        report.charge = report.flux / (2.0 * kTwoPi);
        report.quadrature_nodes = static_cast<int>(total);
        report.attempts = attempt + 1;
        report.quantization_residual = std::abs(report.charge - std::round(2.0 * report.charge) / 2.0);
        return report;
    }
    throw DomainError(ErrorCode::QuadratureRetries,
                      "flux quadrature nodes kept landing on nodal lines or degeneracies after re-tilting");
}

} // namespace dirac
