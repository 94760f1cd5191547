#include "dirac/holonomy.hpp"
#include "dirac/errors.hpp"
#include "dirac/gauge.hpp"
#include "dirac/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dirac {

std::string_view to_string(Method m)
{
    switch (m) {
    case Method::LineIntegral: return "line_integral";
    case Method::Wilson: return "wilson";
    case Method::FluxPrediction: return "flux_prediction";
    case Method::Adiabatic: return "adiabatic";
    }
    return "unknown";
}

double PhaseResult::over_pi() const { return value / kPi; }

PhaseResult make_phase(double value, Method method, std::string description)
{
    PhaseResult r;
    r.value = value;
    r.principal = principal_angle(value);
    r.method = method;
    r.description = std::move(description);
    return r;
}

namespace {

constexpr double kSegmentTolerance = 1e-13;
// Closed circles are split into this many arcs before adaptive refinement.
constexpr int kArcPieces = 8;

Vec3 connection_or_throw(const ModelSpec& model, const ParamPoint& p, Branch branch, Gauge gauge)
{
    try {
        return berry_connection(model, p, branch, gauge).a_real;
    } catch (const DomainError& e) {
        throw DomainError(ErrorCode::LoopTouchesString, e.what());
    }
}

QuadratureResult integrate_segment(const ModelSpec& model, Branch branch, Gauge gauge, const Vec3& a, const Vec3& b)
{
    const Vec3 d = b - a;
    if (norm(d) == 0.0) return {};
    return integrate_adaptive(
        [&](double t) { return dot(connection_or_throw(model, a + t * d, branch, gauge), d); }, 0.0, 1.0,
        kSegmentTolerance);
}

QuadratureResult integrate_polyline(const ModelSpec& model, Branch branch, Gauge gauge, const std::vector<Vec3>& v)
{
    std::vector<double> values;
    double error = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const QuadratureResult q = integrate_segment(model, branch, gauge, v[i - 1], v[i]);
        values.push_back(q.value);
        error += q.error;
    }
    return {pairwise_sum(values), error};
}

std::string describe_run(const ModelSpec& model, Branch branch, Gauge gauge, const std::string& what)
{
    return model.name + " " + std::string(to_string(branch)) + " " + std::string(to_string(gauge)) + " " + what;
}

} // namespace

PhaseResult loop_phase_line_integral(const ModelSpec& model, Branch branch, const LoopSpec& loop, Gauge gauge)
{
    QuadratureResult total;
    if (const auto* p = std::get_if<PolylineLoop>(&loop.shape())) {
        total = integrate_polyline(model, branch, gauge, p->vertices);
    } else {
        std::vector<double> values;
        for (int k = 0; k < kArcPieces; ++k) {
            const double lo = static_cast<double>(k) / kArcPieces;
            const double hi = static_cast<double>(k + 1) / kArcPieces;
            const QuadratureResult q = integrate_adaptive(
                [&](double s) { return dot(connection_or_throw(model, loop.point(s), branch, gauge), loop.velocity(s)); },
                lo, hi, kSegmentTolerance);
            values.push_back(q.value);
            total.error += q.error;
        }
        total.value = pairwise_sum(values);
    }
    PhaseResult r = make_phase(total.value, Method::LineIntegral, describe_run(model, branch, gauge, loop.describe()));
    r.error_estimate = total.error;
    return r;
}

PhaseResult loop_phase_wilson(const ModelSpec& model, Branch branch, const LoopSpec& loop, Gauge gauge)
{
    const std::vector<Vec3> points = loop.sample();
    std::vector<Spinor> states(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        const EigenPair pair = eigenpair(model, points[k], branch, gauge);
        if (pair.on_string) {
            std::ostringstream os;
            os << "Wilson loop sample " << k << " lies on a nodal line";
            throw DomainError(ErrorCode::LoopTouchesString, os.str());
        }
        states[k] = pair.vector;
    }
    KahanSum sum;
    std::complex<double> product{1.0, 0.0};
    for (std::size_t k = 0; k < states.size(); ++k) {
        const Spinor& next = states[(k + 1) % states.size()];
        const std::complex<double> overlap = inner(states[k], next);
        const double step = std::arg(overlap);
        if (std::abs(step) > kPi / 2.0) {
            std::ostringstream os;
            os << "Wilson step " << k << " has phase " << step << " rad; increase the node count";
            throw DomainError(ErrorCode::RefineSteps, os.str());
        }
        sum.add(-step);
        product *= overlap / std::abs(overlap);
    }
    PhaseResult r = make_phase(sum.value(), Method::Wilson, describe_run(model, branch, gauge, loop.describe()));
    r.principal = principal_angle(-std::arg(product));
    return r;
}

PhaseResult loop_phase_flux(double mu, const LoopSpec& loop, const std::vector<int>& strings_pierced, Cap cap,
                            const Vec3& monopole)
{
    const auto* c = std::get_if<CircleZ>(&loop.shape());
    if (c == nullptr) throw DomainError(ErrorCode::Unsupported, "flux prediction needs a horizontal circle");
    if (std::hypot(c->center.x - monopole.x, c->center.y - monopole.y) > 1e-12)
        throw DomainError(ErrorCode::Unsupported, "circle is not centered on the monopole's vertical axis");
    const double zrel = c->center.z - monopole.z;
    const double sphere_r = std::hypot(c->radius, zrel);
    const double s = c->orientation == Orientation::CCW ? 1.0 : -1.0;
    // Solid angles of the two caps, signed by the right-hand rule about the loop.
    const double omega = cap == Cap::Upper ? s * kTwoPi * (1.0 - zrel / sphere_r) : -s * kTwoPi * (1.0 + zrel / sphere_r);
    long strings = 0;
    for (int m : strings_pierced) strings += m;
    std::ostringstream os;
    os << "mu=" << mu << " " << (cap == Cap::Upper ? "upper" : "lower") << " cap, sum m=" << strings << ", "
       << loop.describe();
    return make_phase(mu * omega + kTwoPi * static_cast<double>(strings), Method::FluxPrediction, os.str());
}

PhaseResult path_phase(const ModelSpec& model, Branch branch, const PathSpec& path, Gauge gauge)
{
    const QuadratureResult q = integrate_polyline(model, branch, gauge, path.vertices());
    PhaseResult r = make_phase(q.value, Method::LineIntegral, describe_run(model, branch, gauge, path.describe()));
    r.error_estimate = q.error;
    return r;
}

std::vector<double> default_epsilon_ladder()
{
    std::vector<double> out;
    for (int k = 0; k <= 6; ++k) out.push_back(0.1 * std::ldexp(1.0, -k));
    return out;
}

DegeneratePathResult degenerate_path_phase(const ModelSpec& model, Branch branch, const PathSpec& axis_path, Side side,
                                           const std::vector<double>& epsilons, int order)
{
    if (model.name != "base") throw DomainError(ErrorCode::Unsupported, "degenerate-path phase is defined for the base model");
    if (epsilons.empty()) throw std::invalid_argument("epsilon list is empty");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0)) throw std::invalid_argument("epsilons must be positive");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw std::invalid_argument("epsilons must be strictly decreasing");
    }
    const auto& v = axis_path.vertices();
    if (v.size() != 2) throw std::invalid_argument("degenerate path must be a single straight segment");
    const Vec3 a = v.front();
    const Vec3 b = v.back();
    if (a.y != 0.0 || a.z != 0.0 || b.y != 0.0 || b.z != 0.0 || !(a.x < 0.0 && b.x > 0.0))
        throw std::invalid_argument("degenerate path must run along the X axis through the origin");
    if (order < 0) throw std::invalid_argument("extrapolation order must be non-negative");

    const double sign = side == Side::PlusY ? 1.0 : -1.0;
    DegeneratePathResult out;
    out.epsilons = epsilons;
    out.order = std::min<int>(order, static_cast<int>(epsilons.size()) - 1);
    for (double eps : epsilons) {
        const Vec3 shift{0.0, sign * eps, 0.0};
        // The integrand peaks over a width ~eps around X = 0; grade the panels geometrically
        // toward it so no Kronrod panel can step over the peak.
        std::vector<Vec3> vertices{a + shift};
        std::vector<double> left;
        std::vector<double> right;
        for (double x = eps; x < std::min(-a.x, b.x); x *= 4.0) {
            if (x < -a.x) left.push_back(-x);
            if (x < b.x) right.push_back(x);
        }
        for (auto it = left.rbegin(); it != left.rend(); ++it) vertices.push_back(Vec3{*it, 0.0, 0.0} + shift);
        vertices.push_back(shift);
        for (double x : right) vertices.push_back(Vec3{x, 0.0, 0.0} + shift);
        vertices.push_back(b + shift);
        const PathSpec shifted = PathSpec::polyline(std::move(vertices));
        out.samples.push_back(path_phase(model, branch, shifted).value);
    }
    const double limit = richardson_extrapolate(out.epsilons, out.samples, out.order);
    std::ostringstream os;
    os << "through-degeneracy path, side " << (side == Side::PlusY ? "+Y" : "-Y") << ", Richardson order "
       << out.order << " over " << epsilons.size() << " offsets";
    out.phase = make_phase(limit, Method::LineIntegral, os.str());
    return out;
}

WilsonSweepReport charge_by_wilson_sweep(const ModelSpec& model, const ParamPoint& center, double radius, Branch branch,
                                         int bands, int nodes_per_loop, Gauge gauge)
{
    if (!(radius > 0.0)) throw std::invalid_argument("sweep needs a positive radius");
    if (bands < 4) throw std::invalid_argument("sweep needs at least 4 bands");
    // Latitude circles at polar angles k pi / bands, k = 1 .. bands - 1.
    const std::size_t count = static_cast<std::size_t>(bands - 1);
    std::vector<double> raw(count, 0.0);
    parallel_for(count, [&](std::size_t i) {
        const double theta = kPi * static_cast<double>(i + 1) / bands;
        const LoopSpec loop = LoopSpec::circle_z(center.z + radius * std::cos(theta), radius * std::sin(theta),
                                                 Orientation::CCW, nodes_per_loop, center.x, center.y);
        raw[i] = loop_phase_wilson(model, branch, loop, gauge).principal;
    });
    // Each circle's phase is the flux through its northern cap mod 2 pi; follow it continuously.
    std::vector<double> flux(count);
    flux[0] = raw[0];
    for (std::size_t i = 1; i < count; ++i) flux[i] = flux[i - 1] + principal_angle(raw[i] - flux[i - 1]);
    // The uncovered southern cap shrinks quadratically with the polar gap.
    const double f1 = flux[count - 1];
    const double f2 = flux[count - 2];
    WilsonSweepReport report;
    report.flux = f1 + (f1 - f2) / 3.0;
    report.charge = report.flux / (2.0 * kTwoPi);
    report.bands = bands;
    report.nodes_per_loop = nodes_per_loop;
    return report;
}

} // namespace dirac
