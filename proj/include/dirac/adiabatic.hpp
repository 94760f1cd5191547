#pragma once

#include "dirac/eigen.hpp"
#include "dirac/loops.hpp"
#include "dirac/models.hpp"

#include <functional>
#include <vector>

namespace dirac {

enum class Ramp { Linear, SmoothC1 };

struct SweepSpec {
    LoopSpec loop;
    double total_time = 1000.0;
    Ramp ramp = Ramp::SmoothC1;
    long steps = 100000;
};

struct AdiabaticRun {
    Spinor final_state{};
    double total_phase = 0.0;      // continuously tracked arg <n(R(t))|psi(t)>, unwrapped
    double dynamical_phase = 0.0;  // -int E dt
    double geometric_phase = 0.0;  // total - dynamical
    double fidelity = 0.0;         // |<n(R(T))|psi(T)>|^2
    double norm_drift = 0.0;       // largest | |psi| - 1 | seen before renormalization
    long steps_used = 0;
};

/// Smallest spectral gap 2 rho tolerated along a sweep.
inline constexpr double kMinimumGap = 1e-3;

/// Integrates i dpsi/dt = H(R(t)) psi with a fourth-order commutator Magnus step
/// (exact for constant H), starting from the normalized eigenvector at the loop start.
/// `reference_phase`, if set, multiplies the instantaneous reference eigenvector by
/// exp(i chi(R)); the extracted geometric phase must not depend on it.
AdiabaticRun evolve(const ModelSpec& model, Branch branch, const SweepSpec& sweep,
                    const std::function<double(const Vec3&)>& reference_phase = {});

struct ConvergenceRow {
    double total_time = 0.0;
    double geometric_phase = 0.0;
    double error = 0.0;
    double fidelity = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    double oracle = 0.0;  // line-integral holonomy
    /// p in error ~ T^-p, least squares in log-log.
    double fitted_order = 0.0;
    bool monotone = false;
};

/// Runs evolve for each total time (concurrently, results in input order) with dt = time_step.
ConvergenceReport convergence_report(const ModelSpec& model, Branch branch, const LoopSpec& loop,
                                     const std::vector<double>& total_times, Ramp ramp = Ramp::SmoothC1,
                                     double time_step = 0.01);

} // namespace dirac
