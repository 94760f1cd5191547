#include "dirac/reference_checks.hpp"
#include "dirac/gauge.hpp"
#include "dirac/holonomy.hpp"
#include "dirac/numerics.hpp"
#include "dirac/strings.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dirac {

namespace {

CheckResult make_check(std::string name, double value, double expected, double tolerance, std::string detail = {})
{
    return {std::move(name), value, expected, tolerance, std::abs(value - expected) <= tolerance, std::move(detail)};
}

std::string format_number(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Largest distance from each expected endpoint to the nearest refined degeneracy, or +inf
// when counts differ or any endpoint fails to classify as a degeneracy.
double endpoint_mismatch(const StringSet& set, const std::vector<Vec3>& expected)
{
    if (set.refined_endpoints.size() != expected.size()) return std::numeric_limits<double>::infinity();
    if (std::find(set.endpoint_is_degeneracy.begin(), set.endpoint_is_degeneracy.end(), false) !=
        set.endpoint_is_degeneracy.end())
        return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (const Vec3& e : expected) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& r : set.refined_endpoints) best = std::min(best, distance(e, r));
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace

std::vector<CheckResult> reproduce_reference_values()
{
    std::vector<CheckResult> out;
    const ModelSpec base = ModelSpec::base();

    for (double z : {0.0, 0.98, 0.5, -0.98, -0.5}) {
        const LoopSpec loop = LoopSpec::latitude(z);
        const double expected = -kPi * (1.0 - z);
        const std::string tag = "circuit z=" + format_number(z);
        out.push_back(make_check(tag + " line integral", loop_phase_line_integral(base, Branch::Plus, loop).value,
                                 expected, 1e-6));
        out.push_back(make_check(tag + " wilson", loop_phase_wilson(base, Branch::Plus, loop).value, expected, 1e-4));
        const PhaseResult upper = loop_phase_flux(-0.5, loop, {}, Cap::Upper);
        const PhaseResult lower = loop_phase_flux(-0.5, loop, {-1}, Cap::Lower);
        out.push_back(make_check(tag + " cap independence", upper.value, lower.value, 1e-9));
    }

    out.push_back(make_check("charge plus", monopole_charge(base, {}, 1.0, Branch::Plus).charge, -0.5, 1e-4));
    out.push_back(make_check("charge minus", monopole_charge(base, {}, 1.0, Branch::Minus).charge, 0.5, 1e-4));

    const GridSpec grid = GridSpec::cube(-1.0, 1.0, 0.02);
    struct Scan {
        std::string name;
        ModelSpec model;
        std::vector<Vec3> endpoints;
    };
    const std::vector<Scan> scans{
        {"string endpoints base", base, {{0.0, 0.0, 0.0}}},
        {"string endpoints z-quadratic", ModelSpec::z_quadratic(0.5), {{0.0, 0.0, 0.5}, {0.0, 0.0, -0.5}}},
        {"string endpoints x-cubic", ModelSpec::x_cubic(-0.5, 0.2, 0.8),
         {{-0.5, 0.0, 0.0}, {0.2, 0.0, 0.0}, {0.8, 0.0, 0.0}}},
    };
    for (const Scan& s : scans) {
        const StringSet set = classify_endpoints(s.model, scan_nodal_set(s.model, Branch::Plus, grid));
        std::ostringstream detail;
        detail << set.strings.size() << " strings, " << set.endpoints.size() << " interior endpoints";
        out.push_back(make_check(s.name, endpoint_mismatch(set, s.endpoints), 0.0, 1e-6, detail.str()));
    }

    const PathSpec axis = PathSpec::polyline({{-1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}});
    const auto ladder = default_epsilon_ladder();
    out.push_back(make_check("degenerate path +Y",
                             degenerate_path_phase(base, Branch::Plus, axis, Side::PlusY, ladder).phase.value, kPi / 2.0,
                             1e-6));
    out.push_back(make_check("degenerate path -Y",
                             degenerate_path_phase(base, Branch::Plus, axis, Side::MinusY, ladder).phase.value,
                             -kPi / 2.0, 1e-6));
    return out;
}

} // namespace dirac
