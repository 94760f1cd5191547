#include "dirac/cli.hpp"
#include "dirac/adiabatic.hpp"
#include "dirac/errors.hpp"
#include "dirac/gauge.hpp"
#include "dirac/holonomy.hpp"
#include "dirac/numerics.hpp"
#include "dirac/reference_checks.hpp"
#include "dirac/strings.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

namespace dirac::cli {

namespace {

using nlohmann::json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string model = "base";
    std::string params;
    std::string fx;
    std::string fy;
    std::string fz;
    std::string branch = "plus";
    std::string gauge = "standard";
    std::string gauge_choice = "auto";  // curvature and charge
    bool json_only = false;
    std::string out_dir;

    std::string at;
    double h = 0.0;
    std::string center = "0,0,0";
    double radius = 1.0;
    int polar_nodes = 64;
    int azimuthal_nodes = 128;
    bool wilson_sweep = false;

    std::string grid = "x=-1:1:0.02,y=-1:1:0.02,z=-1:1:0.02";
    double contour_level = 1e-3;

    std::string circle = "z=0.5";
    double sphere_r = 1.0;
    std::string orientation = "ccw";
    int nodes = 4096;
    std::string method = "all";
    std::string strings;
    std::string cap = "upper";
    std::optional<double> mu;

    std::string rc = "0,-1,0";
    std::string protocol = "xyz";

    std::string side = "both";
    std::string epsilons;
    int order = 2;

    double total_time = 2000.0;
    double steps = 2e5;
    std::string ramp = "smooth";
    std::string t_list = "250,500,1000,2000";
    double dt = 0.01;

    std::string figure = "fig1";
};

// Output of one subcommand before it is wrapped in the envelope.
struct Report {
    json inputs = json::object();
    json outputs = json::object();
    std::vector<std::string> warnings;
    std::vector<std::string> summary;
    int exit_code = kExitOk;
    /// Replaces the --model description when the command fixes its own model.
    json model;
};

std::vector<double> parse_numbers(const std::string& text, const std::string& what)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad number '" + item + "' in " + what);
        }
    }
    return out;
}

Vec3 parse_point(const std::string& text, const std::string& what)
{
    const auto v = parse_numbers(text, what);
    if (v.size() != 3) throw std::invalid_argument(what + " needs three comma-separated numbers");
    return {v[0], v[1], v[2]};
}

std::map<std::string, double> parse_key_values(const std::string& text, const std::string& what)
{
    std::map<std::string, double> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw std::invalid_argument(what + " entries need the form key=value");
        const auto v = parse_numbers(item.substr(eq + 1), what);
        if (v.size() != 1) throw std::invalid_argument(what + " entry '" + item + "' needs one value");
        out[item.substr(0, eq)] = v[0];
    }
    return out;
}

Branch parse_branch(const std::string& b)
{
    if (b == "plus" || b == "+") return Branch::Plus;
    if (b == "minus" || b == "-") return Branch::Minus;
    throw std::invalid_argument("branch must be plus or minus");
}

Gauge parse_gauge(const std::string& g)
{
    if (g == "standard") return Gauge::Standard;
    if (g == "alternate") return Gauge::Alternate;
    throw std::invalid_argument("gauge must be standard or alternate");
}

GaugeChoice parse_gauge_choice(const std::string& g)
{
    if (g == "auto") return GaugeChoice::Auto;
    return parse_gauge(g) == Gauge::Standard ? GaugeChoice::Standard : GaugeChoice::Alternate;
}

Orientation parse_orientation(const std::string& o)
{
    if (o == "ccw") return Orientation::CCW;
    if (o == "cw") return Orientation::CW;
    throw std::invalid_argument("orientation must be ccw or cw");
}

ModelSpec build_model(const Options& o)
{
    const bool custom_terms = !o.fx.empty() || !o.fy.empty() || !o.fz.empty();
    if (o.model == "custom") {
        if (o.fx.empty() || o.fy.empty() || o.fz.empty())
            throw std::invalid_argument("--model custom needs --fx, --fy and --fz");
        if (!o.params.empty()) throw std::invalid_argument("--params does not apply to custom models");
        return ModelSpec::custom("custom", Polynomial::parse(o.fx), Polynomial::parse(o.fy), Polynomial::parse(o.fz));
    }
    if (custom_terms) throw std::invalid_argument("--fx/--fy/--fz require --model custom");
    return ModelSpec::from_name(o.model, parse_key_values(o.params, "--params"));
}

// Circle of the form "z=0.5" (radius from the sphere) or "z=0.5,r=0.3,cx=0,cy=0".
LoopSpec build_circle(const Options& o)
{
    const auto kv = parse_key_values(o.circle, "--circle");
    for (const auto& [k, v] : kv)
        if (k != "z" && k != "r" && k != "cx" && k != "cy") throw std::invalid_argument("unknown --circle key '" + k + "'");
    if (!kv.count("z")) throw std::invalid_argument("--circle needs z=<height>");
    const double z = kv.at("z");
    const double cx = kv.count("cx") ? kv.at("cx") : 0.0;
    const double cy = kv.count("cy") ? kv.at("cy") : 0.0;
    double r = 0.0;
    if (kv.count("r")) {
        r = kv.at("r");
    } else {
        if (!(std::abs(z) < o.sphere_r)) throw std::invalid_argument("--circle z must lie strictly inside --sphere-r");
        r = std::sqrt(o.sphere_r * o.sphere_r - z * z);
    }
    return LoopSpec::circle_z(z, r, parse_orientation(o.orientation), o.nodes, cx, cy);
}

// Adding +0.0 turns -0.0 into 0.0 so signless zeros print as "0.0".
json vec_json(const Vec3& v) { return json::array({v.x + 0.0, v.y + 0.0, v.z + 0.0}); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json phase_json(const PhaseResult& p)
{
    return {{"value_rad", p.value},
            {"value_over_pi", p.over_pi()},
            {"principal_rad", p.principal},
            {"principal_over_pi", p.principal / kPi},
            {"method", std::string(to_string(p.method))},
            {"description", p.description},
            {"error_estimate", p.error_estimate}};
}

json model_json(const ModelSpec& m)
{
    return {{"name", m.name},
            {"validated", m.validated},
            {"params", m.params},
            {"fx", m.fx.to_string()},
            {"fy", m.fy.to_string()},
            {"fz", m.fz.to_string()}};
}

std::string fmt(double v, int digits = 10)
{
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

std::filesystem::path output_dir(const Options& o)
{
    std::string dir = o.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("DIRAC_OUT_DIR");
        dir = env != nullptr && *env != '\0' ? env : ".";
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
    return dir;
}

std::ofstream open_csv(const std::filesystem::path& path)
{
    std::ofstream f(path);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    return f;
}

void close_csv(std::ofstream& f, const std::filesystem::path& path)
{
    f.close();
    if (!f) throw IoError("failed writing '" + path.string() + "'");
}

std::string file_tag(const ModelSpec& m, Branch b) { return m.name + "_" + std::string(to_string(b)); }

// ---------------------------------------------------------------------------------------------

Report cmd_eigen(const Options& o, const ModelSpec& model)
{
    Report r;
    const Vec3 at = parse_point(o.at, "--at");
    const Gauge gauge = parse_gauge(o.gauge);
    r.inputs = {{"at", vec_json(at)}, {"gauge", o.gauge}};
    json energies = json::array();
    json vectors = json::array();
    json on_string = json::array();
    json density = json::array();
    for (Branch b : {Branch::Plus, Branch::Minus}) {
        const EigenPair p = eigenpair(model, at, b, gauge);
        energies.push_back(p.energy);
        vectors.push_back(json::array({json::array({p.vector[0].real(), p.vector[0].imag()}),
                                       json::array({p.vector[1].real(), p.vector[1].imag()})}));
        on_string.push_back(p.on_string);
        density.push_back(p.degenerate ? json(nullptr) : json(normalized_density(p)));
    }
    const EigenPair plus = eigenpair(model, at, Branch::Plus, gauge);
    r.outputs = {{"energies", energies},
                 {"vectors", vectors},
                 {"on_string", on_string},
                 {"normalized_density", density},
                 {"rho", plus.rho},
                 {"degenerate", plus.degenerate},
                 {"field", vec_json(plus.field)}};
    r.summary.push_back("E = +/-" + fmt(plus.rho) + ", on_string plus=" + (on_string[0].get<bool>() ? "yes" : "no") +
                        " minus=" + (on_string[1].get<bool>() ? "yes" : "no"));
    return r;
}

Report cmd_strings(const Options& o, const ModelSpec& model)
{
    Report r;
    const Branch branch = parse_branch(o.branch);
    const Gauge gauge = parse_gauge(o.gauge);
    const GridSpec grid = GridSpec::parse(o.grid);
    r.inputs = {{"branch", o.branch}, {"gauge", o.gauge}, {"grid", grid.to_string()}};
    const StringSet set = classify_endpoints(model, scan_nodal_set(model, branch, grid, gauge));

    const auto dir = output_dir(o);
    const auto path = dir / ("strings_" + file_tag(model, branch) + ".csv");
    auto csv = open_csv(path);
    csv << "string_id,vertex_index,x,y,z\n";
    for (std::size_t s = 0; s < set.strings.size(); ++s)
        for (std::size_t v = 0; v < set.strings[s].size(); ++v) {
            const Vec3& p = set.strings[s][v];
            csv << s << ',' << v << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
                << format_double(p.z) << '\n';
        }
    close_csv(csv, path);

    json endpoints = json::array();
    json refined = json::array();
    json open = json::array();
    for (const Vec3& e : set.endpoints) endpoints.push_back(vec_json(e));
    for (const Vec3& e : set.refined_endpoints) refined.push_back(vec_json(e));
    for (const Vec3& e : set.open_termini) open.push_back(vec_json(e));
    r.outputs = {{"strings_csv", path.string()},
                 {"string_count", set.strings.size()},
                 {"closed", set.closed},
                 {"endpoints", endpoints},
                 {"endpoint_string", set.endpoint_string},
                 {"refined_endpoints", refined},
                 {"endpoint_rho", set.endpoint_rho},
                 {"degeneracy_flags", set.endpoint_is_degeneracy},
                 {"open_termini", open},
                 {"nodal_cells", set.nodal_cells}};
    r.summary.push_back(std::to_string(set.strings.size()) + " strings, " + std::to_string(set.endpoints.size()) +
                        " interior endpoints, " + std::to_string(set.open_termini.size()) + " open termini -> " +
                        path.string());
    const bool all_degenerate = std::all_of(set.endpoint_is_degeneracy.begin(), set.endpoint_is_degeneracy.end(),
                                            [](bool b) { return b; });
    if (!all_degenerate) r.warnings.push_back("an interior endpoint did not refine to a degeneracy");
    return r;
}

Report cmd_connection(const Options& o, const ModelSpec& model)
{
    Report r;
    const Vec3 at = parse_point(o.at, "--at");
    const Branch branch = parse_branch(o.branch);
    const Gauge gauge = parse_gauge(o.gauge);
    r.inputs = {{"at", vec_json(at)}, {"branch", o.branch}, {"gauge", o.gauge}, {"h", o.h}};
    const ConnectionSample c = berry_connection(model, at, branch, gauge);
    r.outputs = {{"a_real", vec_json(c.a_real)}, {"a_imag", vec_json(c.a_imag)}};
    if (o.h > 0.0) {
        const ConnectionSample n = connection_numeric(model, at, branch, o.h, gauge);
        r.outputs["numeric"] = {{"a_real", vec_json(n.a_real)}, {"a_imag", vec_json(n.a_imag)}};
    }
    if (model.name == "base" && gauge == Gauge::Standard) {
        const ConnectionSample a = connection_analytic(at, branch);
        r.outputs["analytic"] = {{"a_real", vec_json(a.a_real)}, {"a_imag", vec_json(a.a_imag)}};
    }
    r.summary.push_back("A = (" + fmt(c.a_real.x) + ", " + fmt(c.a_real.y) + ", " + fmt(c.a_real.z) + ")");
    return r;
}

Report cmd_curvature(const Options& o, const ModelSpec& model)
{
    Report r;
    const Vec3 at = parse_point(o.at, "--at");
    const Branch branch = parse_branch(o.branch);
    const double h = o.h > 0.0 ? o.h : 1e-4;
    const std::string& gauge_name = o.gauge_choice;
    r.inputs = {{"at", vec_json(at)}, {"branch", o.branch}, {"gauge", gauge_name}, {"h", h}};
    const Vec3 b = curvature(model, at, branch, h, parse_gauge_choice(gauge_name));
    r.outputs = {{"curvature", vec_json(b)}};
    if (model.name == "base") {
        const double mu = branch == Branch::Plus ? -0.5 : 0.5;
        const double R = norm(at);
        r.outputs["monopole_field"] = vec_json(at * (mu / (R * R * R)));
    }
    r.summary.push_back("B = (" + fmt(b.x) + ", " + fmt(b.y) + ", " + fmt(b.z) + ")");
    return r;
}

Report cmd_charge(const Options& o, const ModelSpec& model)
{
    Report r;
    const Vec3 center = parse_point(o.center, "--center");
    const Branch branch = parse_branch(o.branch);
    FluxQuadrature q;
    q.polar_nodes = o.polar_nodes;
    q.azimuthal_nodes = o.azimuthal_nodes;
    const std::string& gauge_name = o.gauge_choice;
    q.gauge = parse_gauge_choice(gauge_name);
    r.inputs = {{"center", vec_json(center)}, {"radius", o.radius},        {"branch", o.branch},
                {"gauge", gauge_name},         {"polar_nodes", o.polar_nodes}, {"azimuthal_nodes", o.azimuthal_nodes},
                {"wilson_sweep", o.wilson_sweep}};
    const MonopoleReport m = monopole_charge(model, center, o.radius, branch, q);
    r.outputs = {{"charge", m.charge},
                 {"flux_rad", m.flux},
                 {"flux_over_pi", m.flux / kPi},
                 {"attempts", m.attempts},
                 {"quadrature_nodes", m.quadrature_nodes},
                 {"quantization_residual", m.quantization_residual}};
    r.summary.push_back("charge = " + fmt(m.charge) + " (flux " + fmt(m.flux / kPi) + " pi)");
    if (o.wilson_sweep) {
        const WilsonSweepReport w = charge_by_wilson_sweep(model, center, o.radius, branch);
        r.outputs["wilson_sweep"] = {{"charge", w.charge},
                                     {"flux_rad", w.flux},
                                     {"flux_over_pi", w.flux / kPi},
                                     {"bands", w.bands},
                                     {"nodes_per_loop", w.nodes_per_loop}};
        r.summary.push_back("wilson sweep charge = " + fmt(w.charge));
    }
    if (m.quantization_residual > 1e-3) r.warnings.push_back("charge is not close to a half-integer");
    return r;
}

// Signed string charges crossing a cap of a base-model sphere for a CCW loop.
std::vector<int> base_model_strings(Branch branch, Cap cap, Orientation orientation)
{
    const int s = orientation == Orientation::CCW ? 1 : -1;
    if (branch == Branch::Plus) return cap == Cap::Lower ? std::vector<int>{-s} : std::vector<int>{};
    return cap == Cap::Upper ? std::vector<int>{-s} : std::vector<int>{};
}

Report cmd_loop_phase(const Options& o, const ModelSpec& model)
{
    Report r;
    const Branch branch = parse_branch(o.branch);
    const Gauge gauge = parse_gauge(o.gauge);
    const LoopSpec loop = build_circle(o);
    static const std::vector<std::string> methods{"analytic", "wilson", "flux", "all"};
    if (std::find(methods.begin(), methods.end(), o.method) == methods.end())
        throw std::invalid_argument("--method must be analytic, wilson, flux or all");
    const Cap cap = o.cap == "lower" ? Cap::Lower : Cap::Upper;
    if (o.cap != "upper" && o.cap != "lower") throw std::invalid_argument("--cap must be upper or lower");
    r.inputs = {{"branch", o.branch}, {"gauge", o.gauge},   {"circle", o.circle}, {"sphere_r", o.sphere_r},
                {"orientation", o.orientation}, {"nodes", o.nodes}, {"method", o.method}, {"cap", o.cap},
                {"loop", loop.describe()}};

    std::vector<std::pair<std::string, PhaseResult>> results;
    const bool all = o.method == "all";
    if (all || o.method == "analytic") results.emplace_back("analytic", loop_phase_line_integral(model, branch, loop, gauge));
    if (all || o.method == "wilson") results.emplace_back("wilson", loop_phase_wilson(model, branch, loop, gauge));
    if (all || o.method == "flux") {
        std::optional<double> mu = o.mu;
        if (!mu && model.name == "base") mu = branch == Branch::Plus ? -0.5 : 0.5;
        std::vector<int> strings;
        if (!o.strings.empty()) {
            for (double v : parse_numbers(o.strings, "--strings")) strings.push_back(static_cast<int>(std::lround(v)));
        } else if (model.name == "base" && gauge == Gauge::Standard) {
            strings = base_model_strings(branch, cap, parse_orientation(o.orientation));
        }
        if (!mu) {
            if (o.method == "flux") throw std::invalid_argument("flux prediction for this model needs --mu");
            r.warnings.push_back("flux prediction skipped: no monopole charge known for this model (pass --mu)");
        } else {
            r.inputs["mu"] = *mu;
            r.inputs["strings"] = strings;
            results.emplace_back("flux", loop_phase_flux(*mu, loop, strings, cap));
        }
    }
    json methods_json = json::object();
    for (const auto& [name, p] : results) {
        methods_json[name] = phase_json(p);
        r.summary.push_back(name + ": " + fmt(p.over_pi()) + " pi");
    }
    r.outputs["methods"] = methods_json;
    const PhaseResult& first = results.front().second;
    r.outputs["value_rad"] = first.value;
    r.outputs["value_over_pi"] = first.over_pi();
    r.outputs["principal_rad"] = first.principal;
    r.outputs["principal_over_pi"] = first.principal / kPi;
    r.outputs["method"] = results.front().first;
    double worst = 0.0;
    json pairs = json::array();
    for (std::size_t i = 0; i < results.size(); ++i)
        for (std::size_t j = i + 1; j < results.size(); ++j) {
            const double d = std::abs(results[i].second.value - results[j].second.value);
            worst = std::max(worst, d);
            pairs.push_back({{"a", results[i].first}, {"b", results[j].first}, {"abs_difference_rad", d}});
        }
    r.outputs["agreement_report"] = {{"pairs", pairs}, {"max_abs_difference_rad", worst}};
    return r;
}

Report cmd_phase_map(const Options& o, const ModelSpec& model)
{
    Report r;
    const Branch branch = parse_branch(o.branch);
    const Gauge gauge = parse_gauge(o.gauge);
    const Vec3 rc = parse_point(o.rc, "--rc");
    const GridSpec grid = GridSpec::parse(o.grid);
    PathSpec::protocol(rc, rc, o.protocol);  // validates the axis order
    r.inputs = {{"rc", vec_json(rc)}, {"protocol", o.protocol}, {"grid", grid.to_string()}, {"branch", o.branch},
                {"gauge", o.gauge}};
    const auto n = grid.intervals();
    const std::size_t nx = static_cast<std::size_t>(n[0] + 1);
    const std::size_t ny = static_cast<std::size_t>(n[1] + 1);
    const std::size_t count = nx * ny * static_cast<std::size_t>(n[2] + 1);
    std::vector<double> gamma(count, std::numeric_limits<double>::quiet_NaN());
    parallel_for(count, [&](std::size_t idx) {
        const Vec3 p = grid.point(static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
                                  static_cast<int>(idx / (nx * ny)));
        try {
            gamma[idx] = path_phase(model, branch, PathSpec::protocol(rc, p, o.protocol), gauge).value;
        } catch (const DomainError&) {
        }
    });
    const auto dir = output_dir(o);
    const auto path = dir / ("phase_map_" + file_tag(model, branch) + "_" + o.protocol + ".csv");
    auto csv = open_csv(path);
    csv << "x,y,z,gamma_rad\n";
    std::size_t skipped = 0;
    for (std::size_t idx = 0; idx < count; ++idx) {
        const Vec3 p = grid.point(static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
                                  static_cast<int>(idx / (nx * ny)));
        csv << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(p.z) << ',';
        if (std::isnan(gamma[idx])) {
            ++skipped;
            csv << "nan\n";
        } else {
            csv << format_double(gamma[idx]) << '\n';
        }
    }
    close_csv(csv, path);
    r.outputs = {{"csv", path.string()}, {"points", count}, {"skipped", skipped}};
    if (skipped > 0)
        r.warnings.push_back(std::to_string(skipped) + " grid points have protocol paths touching a nodal line (gamma=nan)");
    r.summary.push_back(std::to_string(count) + " phases -> " + path.string());
    return r;
}

Report cmd_degenerate_path(const Options& o, const ModelSpec& model)
{
    Report r;
    const Branch branch = parse_branch(o.branch);
    const std::vector<double> eps = o.epsilons.empty() ? default_epsilon_ladder() : parse_numbers(o.epsilons, "--epsilons");
    if (o.side != "plus" && o.side != "minus" && o.side != "both")
        throw std::invalid_argument("--side must be plus, minus or both");
    r.inputs = {{"branch", o.branch}, {"side", o.side}, {"epsilons", eps}, {"order", o.order}};
    const PathSpec axis = PathSpec::polyline({{-1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}});
    for (const auto& [name, side] : {std::pair{"plus_y", Side::PlusY}, std::pair{"minus_y", Side::MinusY}}) {
        if (o.side != "both" && name != o.side + "_y") continue;
        const DegeneratePathResult d = degenerate_path_phase(model, branch, axis, side, eps, o.order);
        json out = phase_json(d.phase);
        out["samples_rad"] = d.samples;
        out["epsilons"] = d.epsilons;
        out["extrapolation_order"] = d.order;
        r.outputs[name] = out;
        r.summary.push_back(std::string(name) + ": " + fmt(d.phase.over_pi()) + " pi");
    }
    return r;
}

Ramp parse_ramp(const std::string& s)
{
    if (s == "smooth") return Ramp::SmoothC1;
    if (s == "linear") return Ramp::Linear;
    throw std::invalid_argument("--ramp must be smooth or linear");
}

Report cmd_adiabatic(const Options& o, const ModelSpec& model)
{
    Report r;
    const Branch branch = parse_branch(o.branch);
    const LoopSpec loop = build_circle(o);
    if (!(o.steps >= 1000.0) || o.steps > 1e9) throw std::invalid_argument("--steps must be in [1000, 1e9]");
    const SweepSpec sweep{loop, o.total_time, parse_ramp(o.ramp), static_cast<long>(std::llround(o.steps))};
    r.inputs = {{"branch", o.branch}, {"circle", o.circle}, {"sphere_r", o.sphere_r}, {"orientation", o.orientation},
                {"T", o.total_time},  {"steps", sweep.steps}, {"ramp", o.ramp},       {"loop", loop.describe()}};
    const AdiabaticRun run = evolve(model, branch, sweep);
    r.outputs = {{"geometric_phase_rad", run.geometric_phase},
                 {"geometric_phase_over_pi", run.geometric_phase / kPi},
                 {"dynamical_phase_rad", run.dynamical_phase},
                 {"dynamical_phase_over_pi", run.dynamical_phase / kPi},
                 {"total_phase_rad", run.total_phase},
                 {"total_phase_over_pi", run.total_phase / kPi},
                 {"fidelity", run.fidelity},
                 {"norm_drift", run.norm_drift},
                 {"steps_used", run.steps_used}};
    r.summary.push_back("geometric phase " + fmt(run.geometric_phase / kPi) + " pi, fidelity " + fmt(run.fidelity));
    return r;
}

Report cmd_adiabatic_sweep(const Options& o, const ModelSpec& model)
{
    Report r;
    const Branch branch = parse_branch(o.branch);
    const LoopSpec loop = build_circle(o);
    const std::vector<double> times = parse_numbers(o.t_list, "--T-list");
    r.inputs = {{"branch", o.branch}, {"circle", o.circle}, {"sphere_r", o.sphere_r}, {"T_list", times},
                {"dt", o.dt},         {"ramp", o.ramp},     {"loop", loop.describe()}};
    const ConvergenceReport rep = convergence_report(model, branch, loop, times, parse_ramp(o.ramp), o.dt);
    const auto dir = output_dir(o);
    const auto path = dir / ("adiabatic_sweep_" + file_tag(model, branch) + ".csv");
    auto csv = open_csv(path);
    csv << "T,phase,error,fidelity\n";
    json rows = json::array();
    for (const auto& row : rep.rows) {
        csv << format_double(row.total_time) << ',' << format_double(row.geometric_phase) << ',' << format_double(row.error)
            << ',' << format_double(row.fidelity) << '\n';
        rows.push_back({{"T", row.total_time},
                        {"phase_rad", row.geometric_phase},
                        {"phase_over_pi", row.geometric_phase / kPi},
                        {"error_rad", row.error},
                        {"fidelity", row.fidelity}});
        r.summary.push_back("T=" + fmt(row.total_time) + ": " + fmt(row.geometric_phase / kPi) + " pi, error " +
                            fmt(row.error, 4));
    }
    close_csv(csv, path);
    r.outputs = {{"csv", path.string()},
                 {"rows", rows},
                 {"oracle_rad", rep.oracle},
                 {"oracle_over_pi", rep.oracle / kPi},
                 {"fitted_order", rep.fitted_order},
                 {"monotone", rep.monotone}};
    if (!rep.monotone) r.warnings.push_back("errors are not monotone in T");
    return r;
}

Report cmd_reproduce(const Options&, const ModelSpec&)
{
    Report r;
    json checks = json::array();
    std::size_t failed = 0;
    for (const CheckResult& c : reproduce_reference_values()) {
        checks.push_back({{"name", c.name},
                          {"value", number_or_null(c.value)},
                          {"expected", c.expected},
                          {"tolerance", c.tolerance},
                          {"passed", c.passed},
                          {"detail", c.detail}});
        if (!c.passed) ++failed;
        r.summary.push_back(std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": " + fmt(c.value) + " (expected " +
                            fmt(c.expected) + ")");
    }
    r.outputs = {{"checks", checks}, {"failed", failed}, {"passed", checks.size() - failed}};
    if (failed > 0) r.exit_code = kExitFailure;
    return r;
}

Report cmd_export_figure(const Options& o, const ModelSpec&)
{
    Report r;
    struct Figure {
        ModelSpec model;
        std::vector<Branch> branches;
    };
    std::optional<Figure> fig;
    if (o.figure == "fig1") fig = Figure{ModelSpec::base(), {Branch::Plus}};
    if (o.figure == "fig2") fig = Figure{ModelSpec::base(), {Branch::Plus, Branch::Minus}};
    if (o.figure == "fig3a") fig = Figure{ModelSpec::z_quadratic(0.5), {Branch::Plus, Branch::Minus}};
    if (o.figure == "fig3b") fig = Figure{ModelSpec::x_cubic(-0.5, 0.2, 0.8), {Branch::Plus, Branch::Minus}};
    if (!fig) throw std::invalid_argument("--figure must be fig1, fig2, fig3a or fig3b");
    const GridSpec grid = GridSpec::parse(o.grid);
    r.inputs = {{"figure", o.figure}, {"grid", grid.to_string()}, {"contour_level", o.contour_level}};
    r.model = model_json(fig->model);
    const auto dir = output_dir(o);
    json files = json::array();
    json branches = json::object();
    for (Branch b : fig->branches) {
        const std::string tag = o.figure + "_" + std::string(to_string(b));
        const StringSet set = classify_endpoints(fig->model, scan_nodal_set(fig->model, b, grid));
        const auto strings_path = dir / (tag + "_strings.csv");
        auto csv = open_csv(strings_path);
        csv << "string_id,vertex_index,x,y,z\n";
        for (std::size_t s = 0; s < set.strings.size(); ++s)
            for (std::size_t v = 0; v < set.strings[s].size(); ++v) {
                const Vec3& p = set.strings[s][v];
                csv << s << ',' << v << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
                    << format_double(p.z) << '\n';
            }
        close_csv(csv, strings_path);

        const auto cells = raw_density_contour_cells(fig->model, b, grid, o.contour_level);
        const auto contour_path = dir / (tag + "_contour.csv");
        auto contour = open_csv(contour_path);
        contour << "x,y,z\n";
        for (const Vec3& c : cells)
            contour << format_double(c.x) << ',' << format_double(c.y) << ',' << format_double(c.z) << '\n';
        close_csv(contour, contour_path);

        json refined = json::array();
        for (const Vec3& e : set.refined_endpoints) refined.push_back(vec_json(e));
        json open = json::array();
        for (const Vec3& e : set.open_termini) open.push_back(vec_json(e));
        const json endpoints = {{"endpoints", refined}, {"degeneracy_flags", set.endpoint_is_degeneracy},
                                {"open_termini", open}};
        const auto endpoints_path = dir / (tag + "_endpoints.json");
        std::ofstream ej(endpoints_path);
        if (!ej) throw IoError("cannot write '" + endpoints_path.string() + "'");
        ej << endpoints.dump(2) << '\n';
        ej.close();
        if (!ej) throw IoError("failed writing '" + endpoints_path.string() + "'");

        files.push_back(strings_path.string());
        files.push_back(contour_path.string());
        files.push_back(endpoints_path.string());
        branches[std::string(to_string(b))] = {{"string_count", set.strings.size()},
                                               {"endpoints", refined},
                                               {"degeneracy_flags", set.endpoint_is_degeneracy},
                                               {"contour_cells", cells.size()}};
        r.summary.push_back(std::string(to_string(b)) + ": " + std::to_string(set.strings.size()) + " strings, " +
                            std::to_string(set.refined_endpoints.size()) + " endpoints, " +
                            std::to_string(cells.size()) + " contour cells");
    }
    r.outputs = {{"files", files}, {"branches", branches}};
    return r;
}

void add_model_options(CLI::App* sub, Options& o)
{
    sub->add_option("--model", o.model, "base | z-quadratic | x-cubic | custom")->capture_default_str();
    sub->add_option("--params", o.params, "model parameters, e.g. Z0=0.5 or X1=-0.5,X2=0.2,X3=0.8");
    sub->add_option("--fx", o.fx, "custom fx polynomial, e.g. \"X^3 - X\"");
    sub->add_option("--fy", o.fy, "custom fy polynomial");
    sub->add_option("--fz", o.fz, "custom fz polynomial");
    sub->add_flag("--json-only", o.json_only, "suppress the human-readable summary on stderr");
    sub->add_option("--out-dir", o.out_dir, "directory for CSV output (default: $DIRAC_OUT_DIR or .)");
}

void add_branch(CLI::App* sub, Options& o)
{
    sub->add_option("--branch", o.branch, "plus | minus")->capture_default_str();
}

void add_gauge(CLI::App* sub, Options& o, const std::string& help)
{
    sub->add_option("--gauge", o.gauge, help)->capture_default_str();
}

void add_circle(CLI::App* sub, Options& o)
{
    sub->add_option("--circle", o.circle, "z=<height>[,r=<radius>,cx=<x>,cy=<y>]")->capture_default_str();
    sub->add_option("--sphere-r", o.sphere_r, "sphere radius used when r is omitted")->capture_default_str();
    sub->add_option("--orientation", o.orientation, "ccw | cw, viewed from +Z")->capture_default_str();
    sub->add_option("--nodes", o.nodes, "loop samples for discrete methods")->capture_default_str();
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Dirac strings, monopole charges and geometric phases of two-mode Hamiltonians", "dirac"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    using Handler = Report (*)(const Options&, const ModelSpec&);
    std::map<std::string, Handler> handlers;
    auto add = [&](const std::string& name, const std::string& help, Handler h) {
        handlers[name] = h;
        CLI::App* sub = app.add_subcommand(name, help);
        add_model_options(sub, o);
        return sub;
    };

    {
        auto* s = add("eigen", "eigenvalues and unnormalized eigenvectors at a point", cmd_eigen);
        s->add_option("--at", o.at, "X,Y,Z")->required();
        add_gauge(s, o, "standard | alternate");
    }
    {
        auto* s = add("strings", "trace nodal lines and classify their endpoints", cmd_strings);
        add_branch(s, o);
        add_gauge(s, o, "standard | alternate");
        s->add_option("--grid", o.grid, "x=min:max:step,y=...,z=...")->capture_default_str();
    }
    {
        auto* s = add("connection", "Berry connection at a point", cmd_connection);
        s->add_option("--at", o.at, "X,Y,Z")->required();
        add_branch(s, o);
        add_gauge(s, o, "standard | alternate");
        s->set_help_flag("--help", "print this help message and exit");
        s->add_option("--h", o.h, "also report the finite-difference connection with this step");
    }
    {
        auto* s = add("curvature", "Berry curvature at a point", cmd_curvature);
        s->add_option("--at", o.at, "X,Y,Z")->required();
        add_branch(s, o);
        s->add_option("--gauge", o.gauge_choice, "auto | standard | alternate")->capture_default_str();
        s->set_help_flag("--help", "print this help message and exit");
        s->add_option("--h", o.h, "curl step (default 1e-4)");
    }
    {
        auto* s = add("charge", "monopole charge from the flux through a sphere", cmd_charge);
        add_branch(s, o);
        s->add_option("--gauge", o.gauge_choice, "auto | standard | alternate")->capture_default_str();
        s->add_option("--center", o.center, "X,Y,Z")->capture_default_str();
        s->add_option("--radius", o.radius, "sphere radius")->capture_default_str();
        s->add_option("--polar-nodes", o.polar_nodes)->capture_default_str();
        s->add_option("--azimuthal-nodes", o.azimuthal_nodes)->capture_default_str();
        s->add_flag("--wilson-sweep", o.wilson_sweep, "also measure the charge from Wilson loops");
    }
    {
        auto* s = add("loop-phase", "phase around a horizontal circle", cmd_loop_phase);
        add_branch(s, o);
        add_gauge(s, o, "standard | alternate");
        add_circle(s, o);
        s->add_option("--method", o.method, "analytic | wilson | flux | all")->capture_default_str();
        s->add_option("--cap", o.cap, "upper | lower cap for the flux prediction")->capture_default_str();
        s->add_option("--strings", o.strings, "signed string charges through the cap, e.g. -1");
        s->add_option("--mu", o.mu, "monopole charge for the flux prediction");
    }
    {
        auto* s = add("phase-map", "open-path phases from a reference point over a grid", cmd_phase_map);
        add_branch(s, o);
        add_gauge(s, o, "standard | alternate");
        s->add_option("--rc", o.rc, "reference point X,Y,Z")->capture_default_str();
        s->add_option("--protocol", o.protocol, "axis sweep order, a permutation of xyz")->capture_default_str();
        s->add_option("--grid", o.grid, "x=min:max:step,y=...,z=...")->capture_default_str();
    }
    {
        auto* s = add("degenerate-path", "phase along the X axis through the degeneracy", cmd_degenerate_path);
        add_branch(s, o);
        s->add_option("--side", o.side, "plus | minus | both")->capture_default_str();
        s->add_option("--epsilons", o.epsilons, "comma-separated decreasing offsets (default 0.1*2^-k, k=0..6)");
        s->add_option("--order", o.order, "Richardson order")->capture_default_str();
    }
    {
        auto* s = add("adiabatic", "geometric phase from time evolution around a circle", cmd_adiabatic);
        add_branch(s, o);
        add_circle(s, o);
        s->add_option("--T", o.total_time, "total sweep time")->capture_default_str();
        s->add_option("--steps", o.steps, "minimum number of time steps")->capture_default_str();
        s->add_option("--ramp", o.ramp, "smooth | linear")->capture_default_str();
    }
    {
        auto* s = add("adiabatic-sweep", "adiabatic convergence over several total times", cmd_adiabatic_sweep);
        add_branch(s, o);
        add_circle(s, o);
        s->add_option("--T-list", o.t_list, "comma-separated ascending total times")->capture_default_str();
        s->add_option("--dt", o.dt, "time step")->capture_default_str();
        s->add_option("--ramp", o.ramp, "smooth | linear")->capture_default_str();
    }
    add("reproduce-paper", "recompute the published reference values", cmd_reproduce);
    {
        auto* s = add("export-figure", "write string, contour and endpoint data for a figure", cmd_export_figure);
        s->add_option("--figure", o.figure, "fig1 | fig2 | fig3a | fig3b")->capture_default_str();
        s->add_option("--grid", o.grid, "x=min:max:step,y=...,z=...")->capture_default_str();
        s->add_option("--contour-level", o.contour_level, "raw density level")->capture_default_str();
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        err << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        const auto subs = app.get_subcommands();
        if (e.get_exit_code() == 0) {
            err << (subs.empty() ? app.help() : subs.front()->help());
            return kExitOk;
        }
        err << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    json envelope = {{"tool_version", kToolVersion}, {"command", command}};
    try {
        const ModelSpec model = build_model(o);
        envelope["model"] = model_json(model);
        Report report = handlers.at(command)(o, model);
        if (!report.model.is_null()) envelope["model"] = report.model;
        if (!model.validated) report.warnings.insert(report.warnings.begin(), "custom model: results are not validated");
        envelope["inputs"] = report.inputs;
        envelope["outputs"] = report.outputs;
        envelope["warnings"] = report.warnings;
        out << envelope.dump(2) << '\n';
        if (!o.json_only) {
            for (const auto& line : report.summary) err << line << '\n';
            for (const auto& w : report.warnings) err << "warning: " << w << '\n';
        }
        return report.exit_code;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n\n" << app.get_subcommands().front()->help();
        return kExitUsage;
    } catch (const DomainError& e) {
        envelope["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
        envelope["warnings"] = json::array();
        out << envelope.dump(2) << '\n';
        if (!o.json_only) err << "domain error (" << to_string(e.code()) << "): " << e.what() << '\n';
        return kExitDomain;
    } catch (const IoError& e) {
        envelope["error"] = {{"code", "io_error"}, {"message", e.what()}};
        envelope["warnings"] = json::array();
        out << envelope.dump(2) << '\n';
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace dirac::cli
