#include "dirac/loops.hpp"
#include "dirac/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dirac {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<double> cumulative_lengths(const std::vector<Vec3>& v)
{
    std::vector<double> acc{0.0};
    for (std::size_t i = 1; i < v.size(); ++i) acc.push_back(acc.back() + distance(v[i - 1], v[i]));
    return acc;
}

} // namespace

LoopSpec::LoopSpec(Shape shape, int nodes) : shape_(std::move(shape)), nodes_(nodes)
{
    if (nodes_ < 64) throw std::invalid_argument("loops need at least 64 nodes");
    std::visit(overloaded{
                   [](const CircleZ& c) {
                       if (!(c.radius > 0.0) || !is_finite(c.center))
                           throw std::invalid_argument("circle needs a positive radius and finite center");
                   },
                   [](const PolylineLoop& p) {
                       if (p.vertices.size() < 4) throw std::invalid_argument("closed polyline needs >= 3 distinct vertices");
                       if (distance(p.vertices.front(), p.vertices.back()) > 1e-12)
                           throw std::invalid_argument("polyline loop is not closed");
                       if (cumulative_lengths(p.vertices).back() <= 0.0)
                           throw std::invalid_argument("polyline loop has zero length");
                   },
                   [](const ParametricLoop& p) {
                       if (!p.point) throw std::invalid_argument("parametric loop needs a point function");
                       if (distance(p.point(0.0), p.point(1.0)) > 1e-12)
                           throw std::invalid_argument("parametric loop is not closed");
                   },
               },
               shape_);
}

LoopSpec LoopSpec::circle_z(double z, double radius, Orientation orientation, int nodes, double cx, double cy)
{
    return LoopSpec(CircleZ{{cx, cy, z}, radius, orientation}, nodes);
}

LoopSpec LoopSpec::latitude(double z, double sphere_radius, Orientation orientation, int nodes)
{
    if (!(std::abs(z) < sphere_radius)) throw std::invalid_argument("latitude must lie strictly inside the sphere");
    return circle_z(z, std::sqrt(sphere_radius * sphere_radius - z * z), orientation, nodes);
}

LoopSpec LoopSpec::polyline(std::vector<Vec3> vertices, int nodes)
{
    return LoopSpec(PolylineLoop{std::move(vertices)}, nodes);
}

LoopSpec LoopSpec::circle(const Vec3& center, const Vec3& normal, double radius, int nodes)
{
    const double n_len = norm(normal);
    if (!(n_len > 0.0) || !(radius > 0.0)) throw std::invalid_argument("circle needs a nonzero normal and positive radius");
    const Vec3 n = normal / n_len;
    // e1 is any unit vector orthogonal to n; e2 completes a right-handed frame.
    const Vec3 helper = std::abs(n.x) < 0.9 ? unit(0) : unit(1);
    Vec3 e1 = cross(helper, n);
    e1 = e1 / norm(e1);
    const Vec3 e2 = cross(n, e1);
    ParametricLoop p;
    p.point = [=](double s) {
        const double a = kTwoPi * s;
        return center + radius * (std::cos(a) * e1 + std::sin(a) * e2);
    };
    p.velocity = [=](double s) {
        const double a = kTwoPi * s;
        return kTwoPi * radius * (-std::sin(a) * e1 + std::cos(a) * e2);
    };
    std::ostringstream os;
    os << "circle(center=(" << center.x << "," << center.y << "," << center.z << "), normal=(" << n.x << "," << n.y
       << "," << n.z << "), r=" << radius << ")";
    p.label = os.str();
    return LoopSpec(std::move(p), nodes);
}

Vec3 LoopSpec::point(double s) const
{
    return std::visit(overloaded{
                          [s](const CircleZ& c) {
                              const double sign = c.orientation == Orientation::CCW ? 1.0 : -1.0;
                              const double a = sign * kTwoPi * s;
                              return Vec3{c.center.x + c.radius * std::cos(a), c.center.y + c.radius * std::sin(a),
                                          c.center.z};
                          },
                          [s](const PolylineLoop& p) {
                              const auto acc = cumulative_lengths(p.vertices);
                              const double target = std::clamp(s, 0.0, 1.0) * acc.back();
                              auto it = std::upper_bound(acc.begin(), acc.end(), target);
                              std::size_t i = static_cast<std::size_t>(std::distance(acc.begin(), it));
                              i = std::clamp<std::size_t>(i, 1, acc.size() - 1);
                              const double seg = acc[i] - acc[i - 1];
                              const double t = seg > 0.0 ? (target - acc[i - 1]) / seg : 0.0;
                              return p.vertices[i - 1] + t * (p.vertices[i] - p.vertices[i - 1]);
                          },
                          [s](const ParametricLoop& p) { return p.point(s); },
                      },
                      shape_);
}

Vec3 LoopSpec::velocity(double s) const
{
    return std::visit(overloaded{
                          [s](const CircleZ& c) {
                              const double sign = c.orientation == Orientation::CCW ? 1.0 : -1.0;
                              const double a = sign * kTwoPi * s;
                              const double w = sign * kTwoPi * c.radius;
                              return Vec3{-w * std::sin(a), w * std::cos(a), 0.0};
                          },
                          [s](const PolylineLoop& p) {
                              const auto acc = cumulative_lengths(p.vertices);
                              const double target = std::clamp(s, 0.0, 1.0) * acc.back();
                              auto it = std::upper_bound(acc.begin(), acc.end(), target);
                              std::size_t i = static_cast<std::size_t>(std::distance(acc.begin(), it));
                              i = std::clamp<std::size_t>(i, 1, acc.size() - 1);
                              // skip zero-length segments
                              while (i + 1 < acc.size() && acc[i] == acc[i - 1]) ++i;
                              const double seg = acc[i] - acc[i - 1];
                              return seg > 0.0 ? (p.vertices[i] - p.vertices[i - 1]) * (acc.back() / seg) : Vec3{};
                          },
                          [s](const ParametricLoop& p) {
                              if (p.velocity) return p.velocity(s);
                              constexpr double h = 1e-6;
                              return (p.point(s + h) - p.point(s - h)) / (2.0 * h);
                          },
                      },
                      shape_);
}

std::vector<double> LoopSpec::breakpoints() const
{
    if (const auto* p = std::get_if<PolylineLoop>(&shape_)) {
        const auto acc = cumulative_lengths(p->vertices);
        std::vector<double> out;
        for (double a : acc) {
            const double s = a / acc.back();
            if (out.empty() || s > out.back()) out.push_back(s);
        }
        out.back() = 1.0;
        return out;
    }
    return {0.0, 1.0};
}

std::vector<Vec3> LoopSpec::sample(int count) const
{
    if (count < 3) throw std::invalid_argument("loop sampling needs at least 3 points");
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(count));
    if (const auto* p = std::get_if<PolylineLoop>(&shape_)) {
        // Split every edge so vertices are kept and spacing is roughly uniform.
        const auto acc = cumulative_lengths(p->vertices);
        const double total = acc.back();
        for (std::size_t i = 1; i < p->vertices.size(); ++i) {
            const double len = acc[i] - acc[i - 1];
            if (len <= 0.0) continue;
            const int pieces = std::max(1, static_cast<int>(std::ceil(count * len / total)));
            for (int k = 0; k < pieces; ++k) {
                const double t = static_cast<double>(k) / pieces;
                out.push_back(p->vertices[i - 1] + t * (p->vertices[i] - p->vertices[i - 1]));
            }
        }
        return out;
    }
    for (int k = 0; k < count; ++k) out.push_back(point(static_cast<double>(k) / count));
    return out;
}

LoopSpec LoopSpec::reversed() const
{
    return std::visit(overloaded{
                          [this](const CircleZ& c) {
                              CircleZ r = c;
                              r.orientation = c.orientation == Orientation::CCW ? Orientation::CW : Orientation::CCW;
                              return LoopSpec(r, nodes_);
                          },
                          [this](const PolylineLoop& p) {
                              PolylineLoop r{std::vector<Vec3>(p.vertices.rbegin(), p.vertices.rend())};
                              return LoopSpec(r, nodes_);
                          },
                          [this](const ParametricLoop& p) {
                              ParametricLoop r;
                              auto point = p.point;
                              auto vel = p.velocity;
                              r.point = [point](double s) { return point(1.0 - s); };
                              if (vel) r.velocity = [vel](double s) { return -vel(1.0 - s); };
                              r.label = "reversed " + p.label;
                              return LoopSpec(r, nodes_);
                          },
                      },
                      shape_);
}

LoopSpec LoopSpec::with_nodes(int nodes) const
{
    LoopSpec copy = *this;
    if (nodes < 64) throw std::invalid_argument("loops need at least 64 nodes");
    copy.nodes_ = nodes;
    return copy;
}

std::string LoopSpec::describe() const
{
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const CircleZ& c) {
                       os << "circle_z(z=" << format_double(c.center.z) << ", r=" << format_double(c.radius)
                          << ", center=(" << format_double(c.center.x) << "," << format_double(c.center.y) << "), " << (c.orientation == Orientation::CCW ? "ccw" : "cw") << ")";
                   },
                   [&](const PolylineLoop& p) { os << "polyline(" << p.vertices.size() - 1 << " edges)"; },
                   [&](const ParametricLoop& p) { os << p.label; },
               },
               shape_);
    os << " N=" << nodes_;
    return os.str();
}

PathSpec PathSpec::protocol(const Vec3& start, const Vec3& end, const std::string& axis_order)
{
    std::string order = axis_order;
    std::transform(order.begin(), order.end(), order.begin(), [](unsigned char c) { return std::tolower(c); });
    std::string sorted = order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != "xyz") throw std::invalid_argument("protocol must be a permutation of 'xyz'");
    PathSpec path;
    path.vertices_.push_back(start);
    Vec3 current = start;
    for (char c : order) {
        const int axis = c - 'x';
        current[axis] = end[axis];
        path.vertices_.push_back(current);
    }
    path.description_ = "protocol " + order;
    return path;
}

PathSpec PathSpec::polyline(std::vector<Vec3> vertices)
{
    if (vertices.empty()) throw std::invalid_argument("path needs at least one vertex");
    PathSpec path;
    path.vertices_ = std::move(vertices);
    path.description_ = "polyline";
    return path;
}

PathSpec PathSpec::reversed() const
{
    PathSpec r;
    r.vertices_.assign(vertices_.rbegin(), vertices_.rend());
    r.description_ = "reversed " + description_;
    return r;
}

} // namespace dirac
