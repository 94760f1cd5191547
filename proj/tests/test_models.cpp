#include "dirac/models.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace dirac;

namespace {

void check_matrix(const HermitianMatrix2& m, const std::array<std::complex<double>, 4>& expected)
{
    for (std::size_t i = 0; i < 4; ++i) CHECK(m.entries[i] == expected[i]);
}

std::vector<ModelSpec> builtins()
{
    return {ModelSpec::base(), ModelSpec::z_quadratic(0.5), ModelSpec::x_cubic(-0.5, 0.2, 0.8)};
}

} // namespace

TEST_CASE("evaluate at reference points")
{
    check_matrix(evaluate(ModelSpec::base(), {0, 0, 0}), {0.0, 0.0, 0.0, 0.0});
    check_matrix(evaluate(ModelSpec::base(), {1, 0, 0}), {0.0, 1.0, 1.0, 0.0});
    check_matrix(evaluate(ModelSpec::z_quadratic(0.5), {0, 0, 0.5}), {0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("field_vector at reference points")
{
    CHECK(field_vector(ModelSpec::base(), {1, 2, 3}) == Vec3{1, 2, 3});
    CHECK(field_vector(ModelSpec::z_quadratic(0.5), {0, 0, 1}) == Vec3{0, 0, 0.75});
    const Vec3 f = field_vector(ModelSpec::x_cubic(-0.5, 0.2, 0.8), {0.2, 0, 0});
    CHECK(std::abs(f.x) < 1e-16);
    CHECK(f.y == 0.0);
    CHECK(f.z == 0.0);
}

TEST_CASE("matrices are Hermitian and traceless everywhere")
{
    oracle::Gen gen(11);
    for (const ModelSpec& m : builtins()) {
        for (int i = 0; i < 500; ++i) {
            const Vec3 r = gen.point(-3.0, 3.0);
            const HermitianMatrix2 h = evaluate(m, r);
            CHECK(h(0, 0).imag() == 0.0);
            CHECK(h(1, 1).imag() == 0.0);
            CHECK(h(0, 0) + h(1, 1) == std::complex<double>(0.0, 0.0));
            CHECK(h(0, 1) == std::conj(h(1, 0)));
            // substitution commutes with evaluation
            const HermitianMatrix2 via_base = evaluate(ModelSpec::base(), field_vector(m, r));
            for (std::size_t k = 0; k < 4; ++k) CHECK(h.entries[k] == via_base.entries[k]);
        }
    }
}

TEST_CASE("jacobian matches finite differences")
{
    oracle::Gen gen(12);
    const double h = 1e-6;
    for (const ModelSpec& m : builtins()) {
        for (int i = 0; i < 100; ++i) {
            const Vec3 r = gen.point(-2.0, 2.0);
            const Mat3 j = field_jacobian(m, r);
            for (int axis = 0; axis < 3; ++axis) {
                const Vec3 d = (field_vector(m, r + h * unit(axis)) - field_vector(m, r - h * unit(axis))) / (2 * h);
                for (int c = 0; c < 3; ++c) CHECK(j[static_cast<std::size_t>(c)][axis] == doctest::Approx(d[c]).epsilon(1e-7).scale(1.0));
            }
        }
    }
}

TEST_CASE("polynomial parsing")
{
    const Polynomial p = Polynomial::parse("X^3 - 0.5*X^2 + 2*Y*Z - 0.08");
    oracle::Gen gen(13);
    for (int i = 0; i < 50; ++i) {
        const Vec3 r = gen.point();
        const double expected = r.x * r.x * r.x - 0.5 * r.x * r.x + 2 * r.y * r.z - 0.08;
        CHECK(p(r) == doctest::Approx(expected).epsilon(1e-14));
    }
    CHECK(Polynomial::parse("-Z")({0, 0, 2}) == -2.0);
    CHECK(Polynomial::parse("3")({5, 5, 5}) == 3.0);
    CHECK(Polynomial::parse("1e-1*X*X")({2, 0, 0}) == doctest::Approx(0.4));
    CHECK_THROWS_AS(Polynomial::parse("X^"), std::invalid_argument);
    CHECK_THROWS_AS(Polynomial::parse("X + W"), std::invalid_argument);
    CHECK_THROWS_AS(Polynomial::parse(""), std::invalid_argument);
    CHECK_THROWS_AS(Polynomial::parse("X^-2"), std::invalid_argument);
}

TEST_CASE("polynomial round-trips through to_string")
{
    const Polynomial p = Polynomial::parse("X^3 - 0.5*X^2 + 2*Y*Z - 0.08");
    const Polynomial q = Polynomial::parse(p.to_string());
    oracle::Gen gen(14);
    for (int i = 0; i < 20; ++i) {
        const Vec3 r = gen.point();
        CHECK(q(r) == p(r));
    }
}

TEST_CASE("from_roots expands the product")
{
    const std::vector<double> roots{-0.5, 0.2, 0.8};
    const Polynomial p = Polynomial::from_roots(0, roots);
    for (double x : {-1.0, -0.5, 0.0, 0.2, 0.33, 0.8, 1.7}) {
        const double expected = (x + 0.5) * (x - 0.2) * (x - 0.8);
        CHECK(p({x, 9, 9}) == doctest::Approx(expected).epsilon(1e-14).scale(1.0));
    }
}

TEST_CASE("model validation")
{
    CHECK_THROWS_AS(ModelSpec::z_quadratic(0.0), std::invalid_argument);
    CHECK_THROWS_AS(ModelSpec::z_quadratic(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(ModelSpec::x_cubic(0.2, -0.5, 0.8), std::invalid_argument);
    CHECK_THROWS_AS(ModelSpec::x_cubic(0.2, 0.2, 0.8), std::invalid_argument);
    CHECK_THROWS_AS(ModelSpec::from_name("quartic"), std::invalid_argument);
    CHECK_THROWS_AS(ModelSpec::from_name("z-quadratic", {{"X1", 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(ModelSpec::from_name("base", {{"Z0", 1.0}}), std::invalid_argument);
}

TEST_CASE("named models use the reference parameters")
{
    const ModelSpec zq = ModelSpec::from_name("z-quadratic");
    CHECK(zq.params.at("Z0") == 0.5);
    CHECK(field_vector(zq, {0, 0, 0.5}) == Vec3{0, 0, 0});
    const ModelSpec xc = ModelSpec::from_name("x-cubic");
    CHECK(xc.params.at("X1") == -0.5);
    CHECK(xc.params.at("X2") == 0.2);
    CHECK(xc.params.at("X3") == 0.8);
    const ModelSpec custom = ModelSpec::from_name("x-cubic", {{"X2", 0.1}});
    CHECK(custom.params.at("X2") == 0.1);
    CHECK(ModelSpec::base().validated);
    CHECK_FALSE(ModelSpec::custom("c", Polynomial::coordinate(0), Polynomial::coordinate(1), Polynomial::constant(1)).validated);
}
