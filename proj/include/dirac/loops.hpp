#pragma once

#include "dirac/vec3.hpp"

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace dirac {

/// Counterclockwise when viewed from +Z is positive.
enum class Orientation { CCW, CW };

/// Horizontal circle: center.z fixes the plane.
struct CircleZ {
    Vec3 center;
    double radius = 1.0;
    Orientation orientation = Orientation::CCW;
};

/// Closed vertex list; the first vertex is repeated at the end.
struct PolylineLoop {
    std::vector<Vec3> vertices;
};

/// Closed curve s -> point(s), s in [0, 1], with point(0) == point(1).
struct ParametricLoop {
    std::function<Vec3(double)> point;
    /// d point / ds. Optional; central differences are used when empty.
    std::function<Vec3(double)> velocity;
    std::string label = "parametric";
};

/// A closed circuit in parameter space plus the node count used by discrete methods.
class LoopSpec {
public:
    using Shape = std::variant<CircleZ, PolylineLoop, ParametricLoop>;

    LoopSpec(Shape shape, int nodes);

    /// Circle in the plane Z = z around (cx, cy, z).
    static LoopSpec circle_z(double z, double radius, Orientation orientation = Orientation::CCW,
                             int nodes = 4096, double cx = 0.0, double cy = 0.0);
    /// Circle of latitude z on a sphere of radius sphere_radius centered at the origin.
    static LoopSpec latitude(double z, double sphere_radius = 1.0, Orientation orientation = Orientation::CCW,
                             int nodes = 4096);
    static LoopSpec polyline(std::vector<Vec3> vertices, int nodes = 4096);
    /// Circle of the given radius around `center` in the plane with normal `normal`,
    /// oriented by the right-hand rule about `normal`.
    static LoopSpec circle(const Vec3& center, const Vec3& normal, double radius, int nodes = 4096);

    Vec3 point(double s) const;
    Vec3 velocity(double s) const;

    /// Parameter values where the curve may have kinks (always includes 0 and 1).
    std::vector<double> breakpoints() const;
    /// `count` points around the loop (no repeated closing point). Polyline vertices are
    /// always included.
    std::vector<Vec3> sample(int count) const;
    std::vector<Vec3> sample() const { return sample(nodes_); }

    LoopSpec reversed() const;
    LoopSpec with_nodes(int nodes) const;

    int nodes() const { return nodes_; }
    const Shape& shape() const { return shape_; }
    std::string describe() const;

private:
    Shape shape_;
    int nodes_;
};

/// Open path from a reference point, either a fixed axis-sweep protocol or explicit vertices.
class PathSpec {
public:
    /// Sweeps one coordinate at a time from `start` to `end` in the given axis order,
    /// e.g. "xyz": (x0,y0,z0) -> (X,y0,z0) -> (X,Y,z0) -> (X,Y,Z).
    static PathSpec protocol(const Vec3& start, const Vec3& end, const std::string& axis_order = "xyz");
    static PathSpec polyline(std::vector<Vec3> vertices);

    const std::vector<Vec3>& vertices() const { return vertices_; }
    Vec3 start() const { return vertices_.front(); }
    Vec3 end() const { return vertices_.back(); }
    PathSpec reversed() const;
    std::string describe() const { return description_; }

private:
    std::vector<Vec3> vertices_;
    std::string description_;
};

} // namespace dirac
