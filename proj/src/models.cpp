#include "dirac/models.hpp"
#include "dirac/numerics.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dirac {

namespace {

double ipow(double base, int exponent)
{
    double out = 1.0;
    for (int i = 0; i < exponent; ++i) out *= base;
    return out;
}

// Merges like monomials and drops zero coefficients, keeping first-seen order.
std::vector<Monomial> combine(const std::vector<Monomial>& terms)
{
    std::vector<Monomial> out;
    for (const auto& t : terms) {
        auto it = std::find_if(out.begin(), out.end(), [&](const Monomial& m) { return m.powers == t.powers; });
        if (it == out.end())
            out.push_back(t);
        else
            it->coefficient += t.coefficient;
    }
    std::erase_if(out, [](const Monomial& m) { return m.coefficient == 0.0; });
    return out;
}

class PolynomialParser {
public:
    explicit PolynomialParser(std::string_view text) : text_(text) {}

    std::vector<Monomial> parse()
    {
        std::vector<Monomial> terms;
        skip_space();
        double sign = 1.0;
        if (accept('-'))
            sign = -1.0;
        else
            accept('+');
        terms.push_back(term(sign));
        while (true) {
            skip_space();
            if (accept('+'))
                terms.push_back(term(1.0));
            else if (accept('-'))
                terms.push_back(term(-1.0));
            else
                break;
        }
        skip_space();
        if (pos_ != text_.size()) fail("unexpected character");
        return terms;
    }

private:
    Monomial term(double sign)
    {
        Monomial m{sign, {0, 0, 0}};
        factor(m);
        while (true) {
            skip_space();
            if (!accept('*')) break;
            factor(m);
        }
        return m;
    }

    void factor(Monomial& m)
    {
        skip_space();
        if (pos_ >= text_.size()) fail("expected a factor");
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(text_[pos_])));
        if (c == 'X' || c == 'Y' || c == 'Z') {
            ++pos_;
            int exponent = 1;
            skip_space();
            if (accept('^')) exponent = integer();
            m.powers[c - 'X'] += exponent;
            return;
        }
        m.coefficient *= number();
    }

    double number()
    {
        skip_space();
        const char* begin = text_.data() + pos_;
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), value);
        if (ec != std::errc{}) fail("expected a number");
        pos_ += static_cast<std::size_t>(ptr - begin);
        return value;
    }

    int integer()
    {
        skip_space();
        const char* begin = text_.data() + pos_;
        int value = 0;
        auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), value);
        if (ec != std::errc{} || value < 0) fail("expected a non-negative integer exponent");
        pos_ += static_cast<std::size_t>(ptr - begin);
        return value;
    }

    bool accept(char c)
    {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void skip_space()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const char* why) const
    {
        std::ostringstream os;
        os << "polynomial '" << text_ << "': " << why << " at position " << pos_;
        throw std::invalid_argument(os.str());
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace

Polynomial::Polynomial(std::vector<Monomial> terms) : terms_(combine(terms))
{
    for (const auto& t : terms_)
        if (!std::isfinite(t.coefficient)) throw std::invalid_argument("polynomial coefficients must be finite");
}

Polynomial Polynomial::constant(double c) { return Polynomial(std::vector<Monomial>{Monomial{c, {0, 0, 0}}}); }

Polynomial Polynomial::coordinate(int axis)
{
    Monomial m{1.0, {0, 0, 0}};
    m.powers.at(static_cast<std::size_t>(axis)) = 1;
    return Polynomial(std::vector<Monomial>{m});
}

Polynomial Polynomial::from_roots(int axis, std::span<const double> roots)
{
    // coefficients[k] multiplies v^k
    std::vector<double> coefficients{1.0};
    for (double root : roots) {
        std::vector<double> next(coefficients.size() + 1, 0.0);
        for (std::size_t k = 0; k < coefficients.size(); ++k) {
            next[k + 1] += coefficients[k];
            next[k] -= root * coefficients[k];
        }
        coefficients = std::move(next);
    }
    std::vector<Monomial> terms;
    for (std::size_t k = coefficients.size(); k-- > 0;) {
        Monomial m{coefficients[k], {0, 0, 0}};
        m.powers.at(static_cast<std::size_t>(axis)) = static_cast<int>(k);
        terms.push_back(m);
    }
    return Polynomial(std::move(terms));
}

Polynomial Polynomial::parse(std::string_view text) { return Polynomial(PolynomialParser(text).parse()); }

double Polynomial::operator()(const Vec3& r) const
{
    double sum = 0.0;
    for (const auto& t : terms_)
        sum += t.coefficient * ipow(r.x, t.powers[0]) * ipow(r.y, t.powers[1]) * ipow(r.z, t.powers[2]);
    return sum;
}

Vec3 Polynomial::gradient(const Vec3& r) const
{
    Vec3 g;
    for (const auto& t : terms_) {
        const std::array<double, 3> v{r.x, r.y, r.z};
        for (int axis = 0; axis < 3; ++axis) {
            const int p = t.powers[static_cast<std::size_t>(axis)];
            if (p == 0) continue;
            double term = t.coefficient * p;
            for (int other = 0; other < 3; ++other) {
                const int q = t.powers[static_cast<std::size_t>(other)] - (other == axis ? 1 : 0);
                term *= ipow(v[static_cast<std::size_t>(other)], q);
            }
            g[axis] += term;
        }
    }
    return g;
}

std::string Polynomial::to_string() const
{
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& t : terms_) {
        double c = t.coefficient;
        if (!first) {
            os << (c < 0 ? " - " : " + ");
            c = std::abs(c);
        }
        first = false;
        const bool has_vars = t.powers[0] + t.powers[1] + t.powers[2] > 0;
        if (!has_vars || c != 1.0) {
            if (c == -1.0 && has_vars)
                os << "-";
            else
                os << format_double(c) << (has_vars ? "*" : "");
        }
        bool first_var = true;
        for (int axis = 0; axis < 3; ++axis) {
            const int p = t.powers[static_cast<std::size_t>(axis)];
            if (p == 0) continue;
            if (!first_var) os << "*";
            first_var = false;
            os << static_cast<char>('X' + axis);
            if (p > 1) os << "^" << p;
        }
    }
    return os.str();
}

ModelSpec ModelSpec::base()
{
    return {"base", Polynomial::coordinate(0), Polynomial::coordinate(1), Polynomial::coordinate(2), {}, true};
}

ModelSpec ModelSpec::z_quadratic(double z0)
{
    if (!(z0 > 0.0) || !std::isfinite(z0)) throw std::invalid_argument("z-quadratic requires Z0 > 0");
    Polynomial fz({{1.0, {0, 0, 2}}, {-z0 * z0, {0, 0, 0}}});
    return {"z-quadratic", Polynomial::coordinate(0), Polynomial::coordinate(1), fz, {{"Z0", z0}}, true};
}

ModelSpec ModelSpec::x_cubic(double x1, double x2, double x3)
{
    if (!(x1 < x2 && x2 < x3) || !std::isfinite(x1) || !std::isfinite(x3))
        throw std::invalid_argument("x-cubic requires strictly ordered roots X1 < X2 < X3");
    const std::array<double, 3> roots{x1, x2, x3};
    return {"x-cubic",
            Polynomial::from_roots(0, roots),
            Polynomial::coordinate(1),
            Polynomial::coordinate(2),
            {{"X1", x1}, {"X2", x2}, {"X3", x3}},
            true};
}

ModelSpec ModelSpec::custom(std::string name, Polynomial fx, Polynomial fy, Polynomial fz)
{
    return {std::move(name), std::move(fx), std::move(fy), std::move(fz), {}, false};
}

ModelSpec ModelSpec::from_name(std::string_view name, const std::map<std::string, double>& params)
{
    auto get = [&](const char* key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    auto reject_unknown = [&](std::initializer_list<const char*> known) {
        for (const auto& [key, value] : params) {
            (void)value;
            if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
                throw std::invalid_argument("unknown parameter '" + key + "' for model " + std::string(name));
        }
    };
    if (name == "base") {
        reject_unknown({});
        return base();
    }
    if (name == "z-quadratic") {
        reject_unknown({"Z0"});
        return z_quadratic(get("Z0", 0.5));
    }
    if (name == "x-cubic") {
        reject_unknown({"X1", "X2", "X3"});
        return x_cubic(get("X1", -0.5), get("X2", 0.2), get("X3", 0.8));
    }
    throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

double HermitianMatrix2::norm() const
{
    double s = 0.0;
    for (const auto& e : entries) s += std::norm(e);
    return std::sqrt(s);
}

Vec3 field_vector(const ModelSpec& model, const ParamPoint& r) { return {model.fx(r), model.fy(r), model.fz(r)}; }

Mat3 field_jacobian(const ModelSpec& model, const ParamPoint& r)
{
    return {model.fx.gradient(r), model.fy.gradient(r), model.fz.gradient(r)};
}

HermitianMatrix2 matrix_from_field(const Vec3& f)
{
    using C = std::complex<double>;
    return {{C{f.z, 0.0}, C{f.x, -f.y}, C{f.x, f.y}, C{-f.z, 0.0}}};
}

HermitianMatrix2 evaluate(const ModelSpec& model, const ParamPoint& r) { return matrix_from_field(field_vector(model, r)); }

} // namespace dirac
