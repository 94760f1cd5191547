#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dirac {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Reduces an angle into (-pi, pi].
double principal_angle(double radians);

/// Order-independent summation: the result depends only on the element order, never on
/// how the values were produced.
double pairwise_sum(std::span<const double> values);

/// Compensated running sum.
class KahanSum {
public:
    void add(double v);
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], nodes ascending.
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(int n);

/// Adaptive 15-point Gauss-Kronrod integration of f over [a, b].
struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double relative_tolerance = 1e-13, unsigned max_depth = 30);

/// Richardson extrapolation to h -> 0 of samples taken on a geometric ladder h_k = h_0 q^k
/// (q < 1), assuming an error expansion c_1 h + c_2 h^2 + ... . Eliminates the first
/// `order` terms and returns the entry built from the finest samples.
double richardson_extrapolate(std::span<const double> steps, std::span<const double> values, int order);

/// Runs body(i) for i in [0, n) over the available hardware threads. Each index is visited
/// exactly once; callers write into preallocated slots so results never depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace dirac
