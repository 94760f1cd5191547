#pragma once

#include "dirac/eigen.hpp"
#include "dirac/loops.hpp"
#include "dirac/models.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace dirac {

struct AxisRange {
    double min = -1.0;
    double max = 1.0;
    double step = 0.02;
};

/// Regular sampling box. Nodes are placed at min + i (max - min) / n with n = round((max - min) / step).
struct GridSpec {
    std::array<AxisRange, 3> axes{};

    static GridSpec cube(double lo, double hi, double step);
    /// "x=-1:1:0.02,y=-1:1:0.02,z=-1:1:0.02"
    static GridSpec parse(const std::string& text);

    void validate() const;
    std::array<int, 3> intervals() const;
    double coordinate(int axis, int index) const;
    Vec3 point(int i, int j, int k) const;
    double max_step() const;
    std::string to_string() const;
};

/// Nodal lines of one branch, thinned to polylines.
struct StringSet {
    Branch branch = Branch::Plus;
    Gauge gauge = Gauge::Standard;
    std::vector<std::vector<Vec3>> strings;
    std::vector<bool> closed;  // per polyline: a nodal loop with no termini
    /// Interior termini. Termini on the scan-box boundary go to open_termini instead.
    std::vector<Vec3> endpoints;
    std::vector<std::size_t> endpoint_string;
    std::vector<Vec3> open_termini;
    /// Filled by classify_endpoints.
    std::vector<Vec3> refined_endpoints;
    std::vector<double> endpoint_rho;
    std::vector<bool> endpoint_is_degeneracy;
    std::size_t nodal_cells = 0;
    double grid_step = 0.0;
};

/// rho threshold for declaring a refined endpoint a degeneracy.
inline constexpr double kDegeneracyThreshold = 1e-8;

/// Samples the normalized density on the grid, clusters nodal samples with 26-connectivity,
/// and thins each cluster to polylines by per-slice centroids along its dominant axis.
StringSet scan_nodal_set(const ModelSpec& model, Branch branch, const GridSpec& grid, Gauge gauge = Gauge::Standard);

/// Refines every endpoint by coordinate descent on rho^2 and flags degeneracies.
StringSet classify_endpoints(const ModelSpec& model, StringSet set);

/// Coordinate-descent minimizer of rho^2 starting at `start` with initial step `step`.
Vec3 refine_degeneracy(const ModelSpec& model, const Vec3& start, double step, double tolerance = 1e-10);

/// round(Wilson phase / 2 pi) for a small loop around one nodal line.
/// Throws DomainError(LoopTouchesString) when a loop sample is on the nodal line.
int string_charge(const ModelSpec& model, Branch branch, const LoopSpec& loop);

enum class Component { First = 0, Second = 1 };

/// Winding number of one eigenvector component around 0 along the loop. The sampling is
/// refined until every arg increment is below pi/2.
int component_plane_winding(const ModelSpec& model, Branch branch, Component component, const LoopSpec& loop);

/// Centers of grid cells whose corner raw densities |V|^2 straddle `level`.
std::vector<Vec3> raw_density_contour_cells(const ModelSpec& model, Branch branch, const GridSpec& grid,
                                            double level = 1e-3);

} // namespace dirac
