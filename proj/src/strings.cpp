#include "dirac/strings.hpp"
#include "dirac/errors.hpp"
#include "dirac/holonomy.hpp"
#include "dirac/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dirac {

GridSpec GridSpec::cube(double lo, double hi, double step)
{
    GridSpec g;
    g.axes.fill(AxisRange{lo, hi, step});
    g.validate();
    return g;
}

GridSpec GridSpec::parse(const std::string& text)
{
    GridSpec g;
    std::array<bool, 3> seen{};
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("grid axis '" + item + "' needs the form x=min:max:step");
        std::string name = item.substr(0, eq);
        name.erase(std::remove_if(name.begin(), name.end(), [](unsigned char c) { return std::isspace(c); }), name.end());
        if (name.size() != 1 || std::string("xyzXYZ").find(name[0]) == std::string::npos)
            throw std::invalid_argument("unknown grid axis '" + name + "'");
        const int axis = std::tolower(static_cast<unsigned char>(name[0])) - 'x';
        std::array<double, 3> v{};
        std::stringstream fields(item.substr(eq + 1));
        std::string part;
        int n = 0;
        while (std::getline(fields, part, ':')) {
            if (n == 3) throw std::invalid_argument("grid axis '" + item + "' has too many fields");
            try {
                std::size_t used = 0;
                v[static_cast<std::size_t>(n)] = std::stod(part, &used);
                if (part.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(part);
            } catch (const std::exception&) {
                throw std::invalid_argument("bad number '" + part + "' in grid axis '" + item + "'");
            }
            ++n;
        }
        if (n != 3) throw std::invalid_argument("grid axis '" + item + "' needs min:max:step");
        g.axes[static_cast<std::size_t>(axis)] = {v[0], v[1], v[2]};
        seen[static_cast<std::size_t>(axis)] = true;
    }
    if (!seen[0] || !seen[1] || !seen[2]) throw std::invalid_argument("grid must define x, y and z ranges");
    g.validate();
    return g;
}

void GridSpec::validate() const
{
    for (const AxisRange& a : axes) {
        if (!std::isfinite(a.min) || !std::isfinite(a.max) || !std::isfinite(a.step))
            throw std::invalid_argument("grid ranges must be finite");
        if (!(a.min < a.max)) throw std::invalid_argument("grid needs min < max on every axis");
        if (!(a.step > 0.0) || a.step > a.max - a.min) throw std::invalid_argument("grid step must be in (0, max - min]");
        if ((a.max - a.min) / a.step > 4096.0) throw std::invalid_argument("grid has more than 4096 intervals per axis");
    }
}

std::array<int, 3> GridSpec::intervals() const
{
    std::array<int, 3> n{};
    for (std::size_t a = 0; a < 3; ++a)
        n[a] = std::max(1, static_cast<int>(std::lround((axes[a].max - axes[a].min) / axes[a].step)));
    return n;
}

double GridSpec::coordinate(int axis, int index) const
{
    const AxisRange& a = axes[static_cast<std::size_t>(axis)];
    const int n = intervals()[static_cast<std::size_t>(axis)];
    // Symmetric form keeps 0 and the endpoints exact.
    return (a.min * (n - index) + a.max * index) / n;
}

Vec3 GridSpec::point(int i, int j, int k) const { return {coordinate(0, i), coordinate(1, j), coordinate(2, k)}; }

double GridSpec::max_step() const
{
    const auto n = intervals();
    double s = 0.0;
    for (std::size_t a = 0; a < 3; ++a) s = std::max(s, (axes[a].max - axes[a].min) / n[a]);
    return s;
}

std::string GridSpec::to_string() const
{
    std::ostringstream os;
    const char* names = "xyz";
    for (std::size_t a = 0; a < 3; ++a) {
        if (a) os << ',';
        os << names[a] << '=' << format_double(axes[a].min) << ':' << format_double(axes[a].max) << ':'
           << format_double(axes[a].step);
    }
    return os.str();
}

namespace {

using Index3 = std::array<int, 3>;

struct Lattice {
    Index3 n;  // intervals; nodes per axis = n + 1

    std::size_t size() const
    {
        return static_cast<std::size_t>(n[0] + 1) * static_cast<std::size_t>(n[1] + 1) *
               static_cast<std::size_t>(n[2] + 1);
    }
    std::size_t linear(const Index3& c) const
    {
        return (static_cast<std::size_t>(c[2]) * static_cast<std::size_t>(n[1] + 1) + static_cast<std::size_t>(c[1])) *
                   static_cast<std::size_t>(n[0] + 1) +
               static_cast<std::size_t>(c[0]);
    }
    Index3 unpack(std::size_t idx) const
    {
        const auto nx = static_cast<std::size_t>(n[0] + 1);
        const auto ny = static_cast<std::size_t>(n[1] + 1);
        return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny), static_cast<int>(idx / (nx * ny))};
    }
    bool inside(const Index3& c) const
    {
        for (std::size_t a = 0; a < 3; ++a)
            if (c[a] < 0 || c[a] > n[a]) return false;
        return true;
    }
    bool on_boundary(const Index3& c) const
    {
        for (std::size_t a = 0; a < 3; ++a)
            if (c[a] == 0 || c[a] == n[a]) return true;
        return false;
    }
};

bool is_nodal(const EigenPair& pair)
{
    return pair.rho < kDegeneracyThreshold || normalized_density(pair) < kStringThreshold;
}

std::vector<char> nodal_mask(const ModelSpec& model, Branch branch, const GridSpec& grid, Gauge gauge,
                             const Lattice& lat)
{
    std::vector<char> mask(lat.size(), 0);
    const auto planes = static_cast<std::size_t>(lat.n[2] + 1);
    parallel_for(planes, [&](std::size_t k) {
        for (int j = 0; j <= lat.n[1]; ++j) {
            for (int i = 0; i <= lat.n[0]; ++i) {
                const Index3 c{i, j, static_cast<int>(k)};
                mask[lat.linear(c)] = is_nodal(eigenpair(model, grid.point(i, j, c[2]), branch, gauge)) ? 1 : 0;
            }
        }
    });
    return mask;
}

// One connected piece of a cluster within a single slice of the dominant axis.
struct SliceNode {
    int slice = 0;
    std::vector<Index3> cells;
    Vec3 centroid;
    bool touches_boundary = false;
    std::vector<std::size_t> neighbors;
};

std::vector<std::vector<Index3>> clusters_of(const std::vector<char>& mask, const Lattice& lat)
{
    std::vector<char> visited(mask.size(), 0);
    std::vector<std::vector<Index3>> clusters;
    for (std::size_t idx = 0; idx < mask.size(); ++idx) {
        if (!mask[idx] || visited[idx]) continue;
        std::vector<Index3> cluster;
        std::deque<std::size_t> queue{idx};
        visited[idx] = 1;
        while (!queue.empty()) {
            const std::size_t cur = queue.front();
            queue.pop_front();
            const Index3 c = lat.unpack(cur);
            cluster.push_back(c);
            for (int dz = -1; dz <= 1; ++dz)
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const Index3 nb{c[0] + dx, c[1] + dy, c[2] + dz};
                        if (!lat.inside(nb)) continue;
                        const std::size_t li = lat.linear(nb);
                        if (mask[li] && !visited[li]) {
                            visited[li] = 1;
                            queue.push_back(li);
                        }
                    }
        }
        std::sort(cluster.begin(), cluster.end(), [&](const Index3& a, const Index3& b) {
            return lat.linear(a) < lat.linear(b);
        });
        clusters.push_back(std::move(cluster));
    }
    return clusters;
}

int dominant_axis(const std::vector<Index3>& cluster)
{
    Index3 lo{cluster.front()};
    Index3 hi{cluster.front()};
    for (const Index3& c : cluster)
        for (std::size_t a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], c[a]);
            hi[a] = std::max(hi[a], c[a]);
        }
    int best = 2;
    for (int a = 1; a >= 0; --a)
        if (hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)] >
            hi[static_cast<std::size_t>(best)] - lo[static_cast<std::size_t>(best)])
            best = a;
    return best;
}

bool adjacent(const Index3& a, const Index3& b)
{
    return std::abs(a[0] - b[0]) <= 1 && std::abs(a[1] - b[1]) <= 1 && std::abs(a[2] - b[2]) <= 1;
}

std::vector<SliceNode> slice_graph(const std::vector<Index3>& cluster, int axis, const GridSpec& grid,
                                   const Lattice& lat)
{
    std::map<int, std::vector<Index3>> by_slice;
    for (const Index3& c : cluster) by_slice[c[static_cast<std::size_t>(axis)]].push_back(c);

    std::vector<SliceNode> nodes;
    std::map<int, std::vector<std::size_t>> nodes_in_slice;
    for (auto& [slice, cells] : by_slice) {
        // 8-connected components within the slice
        std::vector<char> used(cells.size(), 0);
        for (std::size_t s = 0; s < cells.size(); ++s) {
            if (used[s]) continue;
            SliceNode node;
            node.slice = slice;
            std::deque<std::size_t> queue{s};
            used[s] = 1;
            while (!queue.empty()) {
                const std::size_t cur = queue.front();
                queue.pop_front();
                node.cells.push_back(cells[cur]);
                for (std::size_t t = 0; t < cells.size(); ++t)
                    if (!used[t] && adjacent(cells[cur], cells[t])) {
                        used[t] = 1;
                        queue.push_back(t);
                    }
            }
            std::sort(node.cells.begin(), node.cells.end(),
                      [&](const Index3& a, const Index3& b) { return lat.linear(a) < lat.linear(b); });
            std::vector<double> xs;
            std::vector<double> ys;
            std::vector<double> zs;
            for (const Index3& c : node.cells) {
                const Vec3 p = grid.point(c[0], c[1], c[2]);
                xs.push_back(p.x);
                ys.push_back(p.y);
                zs.push_back(p.z);
                node.touches_boundary = node.touches_boundary || lat.on_boundary(c);
            }
            const double count = static_cast<double>(node.cells.size());
            node.centroid = Vec3{pairwise_sum(xs), pairwise_sum(ys), pairwise_sum(zs)} / count;
            nodes_in_slice[slice].push_back(nodes.size());
            nodes.push_back(std::move(node));
        }
    }
    for (const auto& [slice, ids] : nodes_in_slice) {
        const auto next = nodes_in_slice.find(slice + 1);
        if (next == nodes_in_slice.end()) continue;
        for (std::size_t a : ids)
            for (std::size_t b : next->second) {
                bool touch = false;
                for (const Index3& ca : nodes[a].cells) {
                    for (const Index3& cb : nodes[b].cells)
                        if (adjacent(ca, cb)) {
                            touch = true;
                            break;
                        }
                    if (touch) break;
                }
                if (touch) {
                    nodes[a].neighbors.push_back(b);
                    nodes[b].neighbors.push_back(a);
                }
            }
    }
    return nodes;
}

// Where a curved string turns parallel to the slicing planes, one slice holds a single blob
// that forks in the next slice. The blob shows up as a short dead-end branch hanging off a
// junction; drop such branches so the junction becomes an ordinary vertex.
std::vector<SliceNode> prune_spurs(std::vector<SliceNode> nodes)
{
    constexpr std::size_t kMaxSpur = 3;
    std::vector<char> removed(nodes.size(), 0);
    auto degree = [&](std::size_t n) { return nodes[n].neighbors.size(); };
    auto detach = [&](std::size_t n) {
        for (std::size_t nb : nodes[n].neighbors) std::erase(nodes[nb].neighbors, n);
        nodes[n].neighbors.clear();
        removed[n] = 1;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t leaf = 0; leaf < nodes.size(); ++leaf) {
            if (removed[leaf] || degree(leaf) != 1) continue;
            std::vector<std::size_t> spur{leaf};
            std::size_t prev = leaf;
            std::size_t cur = nodes[leaf].neighbors[0];
            while (degree(cur) == 2 && spur.size() <= kMaxSpur) {
                spur.push_back(cur);
                const std::size_t next = nodes[cur].neighbors[0] == prev ? nodes[cur].neighbors[1] : nodes[cur].neighbors[0];
                prev = cur;
                cur = next;
            }
            if (degree(cur) < 3 || spur.size() > kMaxSpur) continue;
            for (std::size_t n : spur) detach(n);
            changed = true;
        }
    }
    std::vector<std::size_t> index(nodes.size(), 0);
    std::vector<SliceNode> kept;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        if (removed[n]) continue;
        index[n] = kept.size();
        kept.push_back(std::move(nodes[n]));
    }
    for (SliceNode& node : kept)
        for (std::size_t& nb : node.neighbors) nb = index[nb];
    return kept;
}

void add_terminus(StringSet& set, const SliceNode& node, std::size_t string_id)
{
    if (node.touches_boundary) {
        set.open_termini.push_back(node.centroid);
    } else {
        set.endpoints.push_back(node.centroid);
        set.endpoint_string.push_back(string_id);
    }
}

void trace_polylines(StringSet& set, const std::vector<SliceNode>& nodes)
{
    std::vector<char> edge_used_node(nodes.size(), 0);
    std::map<std::pair<std::size_t, std::size_t>, bool> edge_used;
    auto key = [](std::size_t a, std::size_t b) { return std::make_pair(std::min(a, b), std::max(a, b)); };

    auto walk = [&](std::size_t start, std::size_t first) {
        std::vector<std::size_t> chain{start};
        std::size_t prev = start;
        std::size_t cur = first;
        edge_used[key(prev, cur)] = true;
        while (true) {
            chain.push_back(cur);
            if (nodes[cur].neighbors.size() != 2 || cur == start) break;
            const std::size_t next = nodes[cur].neighbors[0] == prev ? nodes[cur].neighbors[1] : nodes[cur].neighbors[0];
            if (edge_used[key(cur, next)]) break;
            edge_used[key(cur, next)] = true;
            prev = cur;
            cur = next;
        }
        return chain;
    };
    auto emit = [&](const std::vector<std::size_t>& chain, bool closed) {
        const std::size_t id = set.strings.size();
        std::vector<Vec3> line;
        for (std::size_t n : chain) {
            line.push_back(nodes[n].centroid);
            edge_used_node[n] = 1;
        }
        set.strings.push_back(std::move(line));
        set.closed.push_back(closed);
        if (closed) return;
        if (nodes[chain.front()].neighbors.size() <= 1) add_terminus(set, nodes[chain.front()], id);
        if (chain.size() > 1 && nodes[chain.back()].neighbors.size() <= 1) add_terminus(set, nodes[chain.back()], id);
    };

    // Chains starting at termini or junctions.
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        if (nodes[n].neighbors.size() == 2) continue;
        if (nodes[n].neighbors.empty()) {
            emit({n}, false);
            continue;
        }
        for (std::size_t nb : nodes[n].neighbors)
            if (!edge_used[key(n, nb)]) emit(walk(n, nb), false);
    }
    // Whatever remains consists of pure cycles.
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        if (edge_used_node[n] || nodes[n].neighbors.size() != 2) continue;
        emit(walk(n, nodes[n].neighbors[0]), true);
    }
}

} // namespace

StringSet scan_nodal_set(const ModelSpec& model, Branch branch, const GridSpec& grid, Gauge gauge)
{
    grid.validate();
    const Lattice lat{grid.intervals()};
    const std::vector<char> mask = nodal_mask(model, branch, grid, gauge, lat);

    StringSet set;
    set.branch = branch;
    set.gauge = gauge;
    set.grid_step = grid.max_step();
    set.nodal_cells = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), char{1}));
    for (const auto& cluster : clusters_of(mask, lat)) {
        const int axis = dominant_axis(cluster);
        trace_polylines(set, prune_spurs(slice_graph(cluster, axis, grid, lat)));
    }
    return set;
}

Vec3 refine_degeneracy(const ModelSpec& model, const Vec3& start, double step, double tolerance)
{
    if (!(step > 0.0) || !(tolerance > 0.0)) throw std::invalid_argument("refinement needs positive step and tolerance");
    auto objective = [&](const Vec3& p) {
        const Vec3 f = field_vector(model, p);
        return dot(f, f);
    };
    Vec3 best = start;
    double value = objective(best);
    int iterations = 0;
    while (step >= tolerance && value > 0.0 && iterations < 200000) {
        ++iterations;
        bool improved = false;
        for (int axis = 0; axis < 3; ++axis) {
            for (double dir : {1.0, -1.0}) {
                const Vec3 trial = best + (dir * step) * unit(axis);
                const double v = objective(trial);
                if (v < value) {
                    best = trial;
                    value = v;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

StringSet classify_endpoints(const ModelSpec& model, StringSet set)
{
    set.refined_endpoints.clear();
    set.endpoint_rho.clear();
    set.endpoint_is_degeneracy.clear();
    const double step = set.grid_step > 0.0 ? set.grid_step : 1e-2;
    for (const Vec3& e : set.endpoints) {
        const Vec3 r = refine_degeneracy(model, e, step);
        const double rho = norm(field_vector(model, r));
        set.refined_endpoints.push_back(r);
        set.endpoint_rho.push_back(rho);
        set.endpoint_is_degeneracy.push_back(rho < kDegeneracyThreshold);
    }
    return set;
}

int string_charge(const ModelSpec& model, Branch branch, const LoopSpec& loop)
{
    const PhaseResult r = loop_phase_wilson(model, branch, loop, Gauge::Standard);
    return static_cast<int>(std::lround(r.value / kTwoPi));
}

int component_plane_winding(const ModelSpec& model, Branch branch, Component component, const LoopSpec& loop)
{
    const auto slot = static_cast<std::size_t>(component);
    for (int nodes = loop.nodes(); nodes <= (1 << 22); nodes *= 2) {
        const std::vector<Vec3> points = loop.sample(nodes);
        std::vector<std::complex<double>> values;
        values.reserve(points.size());
        for (const Vec3& p : points) {
            const EigenPair pair = eigenpair(model, p, branch);
            const std::complex<double> c = pair.vector[slot];
            if (std::abs(c) <= 1e-12 * std::max(1.0, 2.0 * pair.rho))
                throw DomainError(ErrorCode::ComponentVanishes, "eigenvector component vanishes on the loop");
            values.push_back(c);
        }
        KahanSum total;
        bool coarse = false;
        for (std::size_t k = 0; k < values.size() && !coarse; ++k) {
            const double step = std::arg(values[(k + 1) % values.size()] / values[k]);
            if (std::abs(step) >= kPi / 2.0) coarse = true;
            total.add(step);
        }
        if (!coarse) return static_cast<int>(std::lround(total.value() / kTwoPi));
    }
    throw DomainError(ErrorCode::RefineSteps, "component winding did not resolve with 2^22 samples");
}

std::vector<Vec3> raw_density_contour_cells(const ModelSpec& model, Branch branch, const GridSpec& grid, double level)
{
    grid.validate();
    const Lattice lat{grid.intervals()};
    std::vector<double> density(lat.size());
    parallel_for(static_cast<std::size_t>(lat.n[2] + 1), [&](std::size_t k) {
        for (int j = 0; j <= lat.n[1]; ++j)
            for (int i = 0; i <= lat.n[0]; ++i) {
                const Index3 c{i, j, static_cast<int>(k)};
                density[lat.linear(c)] = norm2(eigenpair(model, grid.point(i, j, c[2]), branch).vector);
            }
    });
    std::vector<Vec3> cells;
    for (int k = 0; k < lat.n[2]; ++k)
        for (int j = 0; j < lat.n[1]; ++j)
            for (int i = 0; i < lat.n[0]; ++i) {
                double lo = density[lat.linear({i, j, k})];
                double hi = lo;
                for (int corner = 1; corner < 8; ++corner) {
                    const double d = density[lat.linear({i + (corner & 1), j + ((corner >> 1) & 1), k + (corner >> 2)})];
                    lo = std::min(lo, d);
                    hi = std::max(hi, d);
                }
                if (lo < level && hi >= level)
                    cells.push_back((grid.point(i, j, k) + grid.point(i + 1, j + 1, k + 1)) * 0.5);
            }
    return cells;
}

} // namespace dirac
