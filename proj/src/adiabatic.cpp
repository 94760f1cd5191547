#include "dirac/adiabatic.hpp"
#include "dirac/errors.hpp"
#include "dirac/holonomy.hpp"
#include "dirac/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>

namespace dirac {

namespace {

// Largest |H| dt allowed per step.
constexpr double kMaxPhasePerStep = 0.05;

double ramp_value(Ramp ramp, double u)
{
    return ramp == Ramp::Linear ? u : 0.5 * (1.0 - std::cos(kPi * u));
}

Spinor propagate(const Vec3& f1, const Vec3& f2, double dt, const Spinor& psi)
{
    // Two-point Gauss Magnus step: M = dt (f1 + f2)/2 + (sqrt 3 / 6) dt^2 (f2 x f1), in Pauli form.
    const Vec3 m = (0.5 * dt) * (f1 + f2) + (std::sqrt(3.0) / 6.0 * dt * dt) * cross(f2, f1);
    const double angle = norm(m);
    if (angle == 0.0) return psi;
    const Vec3 n = m / angle;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const std::complex<double> i{0.0, 1.0};
    // exp(-i angle n.sigma) = cos I - i sin n.sigma
    const std::complex<double> u00 = c - i * s * n.z;
    const std::complex<double> u01 = -i * s * std::complex<double>{n.x, -n.y};
    const std::complex<double> u10 = -i * s * std::complex<double>{n.x, n.y};
    const std::complex<double> u11 = c + i * s * n.z;
    return {u00 * psi[0] + u01 * psi[1], u10 * psi[0] + u11 * psi[1]};
}

Spinor normalized(Spinor v)
{
    const double n = std::sqrt(norm2(v));
    v[0] /= n;
    v[1] /= n;
    return v;
}

} // namespace

AdiabaticRun evolve(const ModelSpec& model, Branch branch, const SweepSpec& sweep,
                    const std::function<double(const Vec3&)>& reference_phase)
{
    if (!(sweep.total_time > 0.0)) throw std::invalid_argument("total time must be positive");
    if (sweep.steps < 1000) throw std::invalid_argument("sweeps need at least 1000 steps");
    const LoopSpec& loop = sweep.loop;
    const double T = sweep.total_time;
    const double s_sign = branch_sign(branch);

    auto field_at = [&](double t) {
        const Vec3 r = loop.point(ramp_value(sweep.ramp, std::clamp(t / T, 0.0, 1.0)));
        const Vec3 f = field_vector(model, r);
        if (2.0 * norm(f) < kMinimumGap) {
            std::ostringstream os;
            os << "spectral gap " << 2.0 * norm(f) << " below " << kMinimumGap << " at t = " << t;
            throw DomainError(ErrorCode::GapClosure, os.str());
        }
        return std::make_pair(r, f);
    };
    auto reference = [&](const Vec3& r, const Vec3& f) {
        const EigenPair pair = eigenpair_from_field(f, branch);
        if (pair.on_string) throw DomainError(ErrorCode::LoopTouchesString, "sweep crosses the reference nodal line");
        Spinor n = normalized(pair.vector);
        if (reference_phase) {
            const std::complex<double> w = std::polar(1.0, reference_phase(r));
            n[0] *= w;
            n[1] *= w;
        }
        return n;
    };

    double h_max = 0.0;
    for (const Vec3& p : loop.sample(std::max(loop.nodes(), 256))) h_max = std::max(h_max, norm(field_vector(model, p)));
    const long needed = static_cast<long>(std::ceil(T * h_max / kMaxPhasePerStep));
    const long steps = std::max(sweep.steps, needed);
    const double dt = T / static_cast<double>(steps);
    const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
    const double c2 = 0.5 + std::sqrt(3.0) / 6.0;

    const auto [r0, f0] = field_at(0.0);
    Spinor psi = reference(r0, f0);
    std::complex<double> last_overlap{1.0, 0.0};
    KahanSum total;
    KahanSum dynamical;
    double drift = 0.0;

    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Vec3 f1 = field_at(t + c1 * dt).second;
        const Vec3 f2 = field_at(t + c2 * dt).second;
        psi = propagate(f1, f2, dt, psi);
        const double len = std::sqrt(norm2(psi));
        drift = std::max(drift, std::abs(len - 1.0));
        psi[0] /= len;
        psi[1] /= len;
        dynamical.add(-s_sign * 0.5 * dt * (norm(f1) + norm(f2)));

        const double t_next = k + 1 == steps ? T : static_cast<double>(k + 1) * dt;
        const auto [r, f] = field_at(t_next);
        const std::complex<double> overlap = inner(reference(r, f), psi);
        const double step = std::arg(overlap * std::conj(last_overlap));
        if (std::abs(step) >= kPi / 2.0) {
            std::ostringstream os;
            os << "overlap phase jumped by " << step << " rad at step " << k << "; increase steps";
            throw DomainError(ErrorCode::RefineSteps, os.str());
        }
        total.add(step);
        last_overlap = overlap;
    }

    AdiabaticRun run;
    run.final_state = psi;
    run.total_phase = total.value();
    run.dynamical_phase = dynamical.value();
    run.geometric_phase = run.total_phase - run.dynamical_phase;
    run.fidelity = std::norm(last_overlap);
    run.norm_drift = drift;
    run.steps_used = steps;
    return run;
}

ConvergenceReport convergence_report(const ModelSpec& model, Branch branch, const LoopSpec& loop,
                                     const std::vector<double>& total_times, Ramp ramp, double time_step)
{
    if (total_times.empty()) throw std::invalid_argument("convergence report needs at least one total time");
    if (!(time_step > 0.0)) throw std::invalid_argument("time step must be positive");
    for (std::size_t i = 1; i < total_times.size(); ++i)
        if (!(total_times[i] > total_times[i - 1])) throw std::invalid_argument("total times must be ascending");

    ConvergenceReport report;
    report.oracle = loop_phase_line_integral(model, branch, loop).value;

    std::vector<std::future<AdiabaticRun>> runs;
    for (double T : total_times) {
        const SweepSpec sweep{loop, T, ramp, std::max(1000L, static_cast<long>(std::ceil(T / time_step)))};
        runs.push_back(std::async(std::launch::async, [&model, branch, sweep] { return evolve(model, branch, sweep); }));
    }
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const AdiabaticRun run = runs[i].get();
        report.rows.push_back({total_times[i], run.geometric_phase, std::abs(run.geometric_phase - report.oracle),
                               run.fidelity});
    }

    report.monotone = true;
    for (std::size_t i = 1; i < report.rows.size(); ++i)
        if (!(report.rows[i].error < report.rows[i - 1].error)) report.monotone = false;

    // Least-squares slope of log(error) against log(T).
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : report.rows)
        if (row.error > 0.0) pts.emplace_back(std::log(row.total_time), std::log(row.error));
    if (pts.size() >= 2) {
        double mx = 0.0;
        double my = 0.0;
        for (const auto& [x, y] : pts) {
            mx += x;
            my += y;
        }
        mx /= static_cast<double>(pts.size());
        my /= static_cast<double>(pts.size());
        double sxy = 0.0;
        double sxx = 0.0;
        for (const auto& [x, y] : pts) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        report.fitted_order = sxx > 0.0 ? -sxy / sxx : 0.0;
    }
    return report;
}

} // namespace dirac
