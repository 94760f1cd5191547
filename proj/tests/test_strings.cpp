#include "dirac/errors.hpp"
#include "dirac/strings.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>

using namespace dirac;

namespace {

const GridSpec& unit_box()
{
    static const GridSpec g = GridSpec::cube(-1.0, 1.0, 0.02);
    return g;
}

double z_extent(const std::vector<Vec3>& line, bool want_max)
{
    double v = line.front().z;
    for (const Vec3& p : line) v = want_max ? std::max(v, p.z) : std::min(v, p.z);
    return v;
}

double max_axis_offset(const std::vector<Vec3>& line)
{
    double d = 0.0;
    for (const Vec3& p : line) d = std::max(d, std::hypot(p.x, p.y));
    return d;
}

bool has_point_near(const std::vector<Vec3>& pts, const Vec3& q, double tol)
{
    return std::any_of(pts.begin(), pts.end(), [&](const Vec3& p) { return norm(p - q) <= tol; });
}

} // namespace

TEST_CASE("grid parsing and validation")
{
    const GridSpec g = GridSpec::parse("x=-1:1:0.5, y=0:2:1,z=-0.5:0.5:0.25");
    CHECK(g.intervals() == std::array<int, 3>{4, 2, 4});
    CHECK(g.coordinate(0, 4) == 1.0);
    CHECK(g.coordinate(2, 2) == 0.0);
    CHECK(GridSpec::parse(g.to_string()).intervals() == g.intervals());
    CHECK(unit_box().intervals() == std::array<int, 3>{100, 100, 100});
    CHECK(unit_box().max_step() == doctest::Approx(0.02));

    for (const char* bad : {"", "x=-1:1:0.1", "x=-1:1,y=-1:1:0.1,z=-1:1:0.1", "x=1:-1:0.1,y=-1:1:0.1,z=-1:1:0.1",
                            "x=-1:1:0,y=-1:1:0.1,z=-1:1:0.1", "w=-1:1:0.1,y=-1:1:0.1,z=-1:1:0.1",
                            "x=-1:1:3,y=-1:1:0.1,z=-1:1:0.1", "x=-1:1:1e-4,y=-1:1:0.1,z=-1:1:0.1",
                            "x=a:1:0.1,y=-1:1:0.1,z=-1:1:0.1"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(GridSpec::parse(bad), std::invalid_argument);
    }
}

TEST_CASE("base model strings")
{
    const ModelSpec base = ModelSpec::base();
    const StringSet plus = classify_endpoints(base, scan_nodal_set(base, Branch::Plus, unit_box()));
    REQUIRE(plus.strings.size() == 1);
    CHECK_FALSE(plus.closed[0]);
    CHECK(max_axis_offset(plus.strings[0]) <= 1e-12);
    CHECK(z_extent(plus.strings[0], false) == doctest::Approx(-1.0));
    CHECK(z_extent(plus.strings[0], true) == doctest::Approx(0.0).epsilon(0.02).scale(1.0));
    REQUIRE(plus.endpoints.size() == 1);
    CHECK(norm(plus.endpoints[0]) <= 0.02);
    CHECK(norm(plus.refined_endpoints[0]) <= 1e-9);
    CHECK(plus.endpoint_is_degeneracy[0]);
    REQUIRE(plus.open_termini.size() == 1);
    CHECK(norm(plus.open_termini[0] - Vec3{0, 0, -1}) <= 1e-12);

    const StringSet minus = classify_endpoints(base, scan_nodal_set(base, Branch::Minus, unit_box()));
    REQUIRE(minus.strings.size() == 1);
    CHECK(z_extent(minus.strings[0], true) == doctest::Approx(1.0));
    CHECK(z_extent(minus.strings[0], false) == doctest::Approx(0.0).epsilon(0.02).scale(1.0));
    REQUIRE(minus.endpoints.size() == 1);
    CHECK(minus.endpoint_is_degeneracy[0]);
    REQUIRE(minus.open_termini.size() == 1);
    CHECK(minus.open_termini[0].z == doctest::Approx(1.0));
}

TEST_CASE("z-quadratic strings")
{
    const ModelSpec m = ModelSpec::z_quadratic(0.5);
    const StringSet plus = classify_endpoints(m, scan_nodal_set(m, Branch::Plus, unit_box()));
    REQUIRE(plus.strings.size() == 1);
    CHECK(plus.open_termini.empty());
    REQUIRE(plus.endpoints.size() == 2);
    CHECK(has_point_near(plus.refined_endpoints, {0, 0, 0.5}, 1e-9));
    CHECK(has_point_near(plus.refined_endpoints, {0, 0, -0.5}, 1e-9));
    CHECK(std::all_of(plus.endpoint_is_degeneracy.begin(), plus.endpoint_is_degeneracy.end(), [](bool b) { return b; }));
    for (std::size_t i = 0; i < plus.endpoints.size(); ++i) CHECK(plus.endpoint_string[i] == 0);

    // the other branch has two semi-infinite strings leaving the box
    const StringSet minus = classify_endpoints(m, scan_nodal_set(m, Branch::Minus, unit_box()));
    CHECK(minus.strings.size() == 2);
    CHECK(minus.open_termini.size() == 2);
    REQUIRE(minus.endpoints.size() == 2);
    CHECK(has_point_near(minus.refined_endpoints, {0, 0, 0.5}, 1e-9));
    CHECK(has_point_near(minus.refined_endpoints, {0, 0, -0.5}, 1e-9));
}

TEST_CASE("x-cubic strings end on the three roots")
{
    const ModelSpec m = ModelSpec::x_cubic(-0.5, 0.2, 0.8);
    for (Branch b : {Branch::Plus, Branch::Minus}) {
        const StringSet s = classify_endpoints(m, scan_nodal_set(m, b, unit_box()));
        CHECK(s.strings.size() == 3);
        REQUIRE(s.endpoints.size() == 3);
        for (double root : {-0.5, 0.2, 0.8}) CHECK(has_point_near(s.refined_endpoints, {root, 0, 0}, 1e-9));
        for (double rho : s.endpoint_rho) CHECK(rho < kDegeneracyThreshold);
    }
}

TEST_CASE("gauge choice moves strings but not endpoints")
{
    for (const ModelSpec& m : {ModelSpec::base(), ModelSpec::z_quadratic(0.5), ModelSpec::x_cubic(-0.5, 0.2, 0.8)}) {
        CAPTURE(m.name);
        const StringSet s = classify_endpoints(m, scan_nodal_set(m, Branch::Plus, unit_box(), Gauge::Standard));
        const StringSet a = classify_endpoints(m, scan_nodal_set(m, Branch::Plus, unit_box(), Gauge::Alternate));
        REQUIRE(s.refined_endpoints.size() == a.refined_endpoints.size());
        for (const Vec3& p : s.refined_endpoints) CHECK(has_point_near(a.refined_endpoints, p, 1e-6));
    }
    const ModelSpec base = ModelSpec::base();
    const StringSet alt = scan_nodal_set(base, Branch::Plus, unit_box(), Gauge::Alternate);
    REQUIRE(alt.strings.size() == 1);
    CHECK(z_extent(alt.strings[0], true) == doctest::Approx(1.0));
}

TEST_CASE("degeneracies are zeros of both branches")
{
    for (const ModelSpec& m : {ModelSpec::base(), ModelSpec::z_quadratic(0.5), ModelSpec::x_cubic(-0.5, 0.2, 0.8)}) {
        const StringSet s = classify_endpoints(m, scan_nodal_set(m, Branch::Plus, unit_box()));
        for (const Vec3& p : s.refined_endpoints) {
            for (Branch b : {Branch::Plus, Branch::Minus}) {
                const EigenPair e = eigenpair(m, p, b);
                CHECK(std::norm(e.vector[0]) + std::norm(e.vector[1]) <= 1e-16);
            }
        }
    }
}

TEST_CASE("closed nodal loop and empty nodal set")
{
    const double c = 0.067;
    const ModelSpec ring = ModelSpec::custom("ring", Polynomial::parse(std::to_string(c) + "*X^2 + " + std::to_string(c) + "*Y^2 - " + std::to_string(0.25 * c)),
                                             Polynomial::parse(std::to_string(c) + "*Z"), Polynomial::constant(-1.0));
    const StringSet s = classify_endpoints(ring, scan_nodal_set(ring, Branch::Plus, unit_box()));
    REQUIRE(s.strings.size() == 1);
    CHECK(s.closed[0]);
    CHECK(s.endpoints.empty());
    CHECK(s.open_termini.empty());
    for (const Vec3& p : s.strings[0]) {
        CHECK(std::hypot(p.x, p.y) == doctest::Approx(0.5).epsilon(0.04));
        CHECK(std::abs(p.z) <= 1e-12);
    }
    CHECK(norm(s.strings[0].front() - s.strings[0].back()) <= 1e-12);

    // the other branch of a field with fz < 0 everywhere has no zeros at all
    const StringSet none = scan_nodal_set(ring, Branch::Minus, unit_box());
    CHECK(none.strings.empty());
    CHECK(none.endpoints.empty());
    CHECK(none.nodal_cells == 0);
}

TEST_CASE("scan is deterministic")
{
    const ModelSpec m = ModelSpec::x_cubic(-0.5, 0.2, 0.8);
    const GridSpec g = GridSpec::cube(-1.0, 1.0, 0.05);
    const StringSet a = scan_nodal_set(m, Branch::Plus, g);
    const StringSet b = scan_nodal_set(m, Branch::Plus, g);
    REQUIRE(a.strings.size() == b.strings.size());
    for (std::size_t i = 0; i < a.strings.size(); ++i) {
        REQUIRE(a.strings[i].size() == b.strings[i].size());
        for (std::size_t k = 0; k < a.strings[i].size(); ++k) CHECK(a.strings[i][k] == b.strings[i][k]);
    }
    CHECK(a.endpoints == b.endpoints);
}

TEST_CASE("refine_degeneracy")
{
    const ModelSpec m = ModelSpec::x_cubic(-0.5, 0.2, 0.8);
    CHECK(norm(refine_degeneracy(m, {0.21, 0.01, -0.013}, 0.02) - Vec3{0.2, 0, 0}) <= 1e-9);
    CHECK(norm(refine_degeneracy(ModelSpec::base(), {0.015, -0.01, 0.007}, 0.02)) <= 1e-9);
    CHECK_THROWS_AS(refine_degeneracy(m, {0, 0, 0}, 0.0), std::invalid_argument);
}

TEST_CASE("string charges")
{
    const ModelSpec base = ModelSpec::base();
    CHECK(string_charge(base, Branch::Plus, LoopSpec::circle_z(-1.0, 0.05)) == -1);
    CHECK(string_charge(base, Branch::Minus, LoopSpec::circle_z(1.0, 0.05, Orientation::CW)) == 1);
    CHECK(string_charge(base, Branch::Minus, LoopSpec::circle_z(1.0, 0.05)) == -1);
    CHECK(string_charge(base, Branch::Plus, LoopSpec::circle_z(0.5, 0.05, Orientation::CCW, 4096, 0.5, 0.5)) == 0);
    CHECK_THROWS_AS(string_charge(base, Branch::Plus, LoopSpec::circle_z(-1.0, 0.05, Orientation::CCW, 64, 0.05)),
                    DomainError);

    // invariant under radius and sampling along the string
    oracle::Gen gen(51);
    for (int i = 0; i < 20; ++i) {
        const double r = gen.uniform(0.01, 0.1);
        const double z = gen.uniform(-1.0, -0.3);
        for (int n : {64, 4096}) {
            CHECK(string_charge(base, Branch::Plus, LoopSpec::circle_z(z, r, Orientation::CCW, n)) == -1);
            CHECK(string_charge(base, Branch::Minus, LoopSpec::circle_z(-z, r, Orientation::CCW, n)) == -1);
        }
    }
    // m = 2 mu with the loop oriented by the right-hand rule about the direction from the
    // string towards its endpoint
    const ModelSpec zq = ModelSpec::z_quadratic(0.5);
    CHECK(string_charge(zq, Branch::Plus, LoopSpec::circle_z(-0.2, 0.05)) == -1);   // endpoint at +0.5 carries -1/2
    CHECK(string_charge(zq, Branch::Plus, LoopSpec::circle_z(0.2, 0.05, Orientation::CW)) == 1);  // endpoint at -0.5 carries +1/2
    CHECK(string_charge(zq, Branch::Minus, LoopSpec::circle_z(0.8, 0.05, Orientation::CW)) == 1);
    const ModelSpec xc = ModelSpec::x_cubic(-0.5, 0.2, 0.8);
    CHECK(string_charge(xc, Branch::Plus, LoopSpec::circle_z(-0.5, 0.05, Orientation::CCW, 4096, -0.5)) == -1);
    CHECK(string_charge(xc, Branch::Plus, LoopSpec::circle_z(-0.5, 0.05, Orientation::CCW, 4096, 0.2)) == 1);
    CHECK(string_charge(xc, Branch::Plus, LoopSpec::circle_z(-0.5, 0.05, Orientation::CCW, 4096, 0.8)) == -1);
}

TEST_CASE("component winding")
{
    const ModelSpec base = ModelSpec::base();
    const LoopSpec unit = LoopSpec::circle_z(-0.5, 1.0);
    CHECK(component_plane_winding(base, Branch::Plus, Component::Second, unit) == 1);
    CHECK(component_plane_winding(base, Branch::Plus, Component::First, unit) == 0);
    CHECK(component_plane_winding(base, Branch::Plus, Component::Second, unit.reversed()) == -1);
    const ModelSpec xc = ModelSpec::x_cubic(-0.5, 0.2, 0.8);
    CHECK(component_plane_winding(xc, Branch::Plus, Component::Second,
                                  LoopSpec::circle_z(0.5, 0.1, Orientation::CCW, 4096, 0.2)) == -1);
    CHECK(component_plane_winding(xc, Branch::Plus, Component::Second,
                                  LoopSpec::circle_z(0.5, 0.1, Orientation::CCW, 4096, 0.8)) == 1);
    // coarse sampling is refined internally
    CHECK(component_plane_winding(base, Branch::Plus, Component::Second, LoopSpec::circle_z(-0.5, 1.0, Orientation::CCW, 64, 0.99)) == 1);
    try {
        component_plane_winding(base, Branch::Plus, Component::Second, LoopSpec::circle_z(0.3, 0.5, Orientation::CCW, 64, 0.5));
        FAIL("expected ComponentVanishes");
    } catch (const DomainError& e) {
        CHECK(e.code() == ErrorCode::ComponentVanishes);
    }
}

TEST_CASE("raw density contour cells")
{
    const ModelSpec base = ModelSpec::base();
    const GridSpec g = GridSpec::cube(-0.5, 0.5, 0.05);
    const auto cells = raw_density_contour_cells(base, Branch::Plus, g);
    CHECK_FALSE(cells.empty());
    // |V|^2 = 2R(R+Z) is below 1e-3 only close to the negative axis and the origin
    for (const Vec3& c : cells) CHECK(std::hypot(c.x, c.y) <= 0.1);
    CHECK(raw_density_contour_cells(base, Branch::Plus, g, 1e-3) == cells);
}
