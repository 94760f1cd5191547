#include "dirac/numerics.hpp"
#include "dirac/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace dirac {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::OnString: return "on_string";
    case ErrorCode::Degenerate: return "degenerate";
    case ErrorCode::LoopTouchesString: return "loop_touches_string";
    case ErrorCode::RefineSteps: return "refine_steps";
    case ErrorCode::GapClosure: return "gap_closure";
    case ErrorCode::ComponentVanishes: return "component_vanishes";
    case ErrorCode::QuadratureRetries: return "quadrature_retries";
    case ErrorCode::Unsupported: return "unsupported";
    }
    return "unknown";
}

std::string format_double(double v)
{
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

double principal_angle(double radians)
{
    double r = std::remainder(radians, kTwoPi);
    if (r <= -kPi) r += kTwoPi;
    return r;
}

double pairwise_sum(std::span<const double> values)
{
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void KahanSum::add(double v)
{
    const double y = v - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
}

GaussLegendreRule gauss_legendre(int n)
{
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
    // legendre_p_zeros returns the non-negative zeros in ascending order.
    const std::vector<double> positive = boost::math::legendre_p_zeros<double>(n);
    GaussLegendreRule rule;
    auto weight = [n](double x) {
        const double dp = boost::math::legendre_p_prime<double>(n, x);
        return 2.0 / ((1.0 - x * x) * dp * dp);
    };
    for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
        if (*it == 0.0) continue;
        rule.nodes.push_back(-*it);
        rule.weights.push_back(weight(*it));
    }
    for (double x : positive) {
        rule.nodes.push_back(x);
        rule.weights.push_back(weight(x));
    }
    return rule;
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double relative_tolerance, unsigned max_depth)
{
    QuadratureResult out;
    if (a == b) return out;
    struct Panel {
        double a;
        double b;
        double value;
        double error;
        double l1;
        unsigned depth;
    };
    auto estimate = [&](double lo, double hi, unsigned depth) {
        Panel p{lo, hi, 0.0, 0.0, 0.0, depth};
        p.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, 0, 0.0, &p.error, &p.l1);
        return p;
    };
    // Global bisection: always split the panel with the largest error estimate.
    auto by_error = [](const Panel& x, const Panel& y) { return x.error < y.error; };
    std::vector<Panel> heap{estimate(a, b, 0)};
    constexpr std::size_t kMaxPanels = 4096;
    while (heap.size() < kMaxPanels) {
        // Tolerance relative to the L1 norm so integrals that cancel to ~0 still terminate.
        double l1 = 0.0;
        double err = 0.0;
        for (const Panel& p : heap) {
            l1 += p.l1;
            err += p.error;
        }
        if (err <= std::max(relative_tolerance, 4.0 * std::numeric_limits<double>::epsilon()) * l1) break;
        std::pop_heap(heap.begin(), heap.end(), by_error);
        const Panel worst = heap.back();
        if (worst.depth >= max_depth) {
            heap.push_back(worst);  // cannot refine further
            std::push_heap(heap.begin(), heap.end(), by_error);
            break;
        }
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        for (const Panel& p : {estimate(worst.a, mid, worst.depth + 1), estimate(mid, worst.b, worst.depth + 1)}) {
            heap.push_back(p);
            std::push_heap(heap.begin(), heap.end(), by_error);
        }
    }
    std::sort(heap.begin(), heap.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    std::vector<double> values;
    values.reserve(heap.size());
    for (const Panel& p : heap) {
        values.push_back(p.value);
        out.error += p.error;
    }
    out.value = pairwise_sum(values);
    return out;
}

double richardson_extrapolate(std::span<const double> steps, std::span<const double> values, int order)
{
    if (steps.empty() || steps.size() != values.size())
        throw std::invalid_argument("richardson_extrapolate: need matching, non-empty ladders");
    std::vector<double> column(values.begin(), values.end());
    const int levels = std::min<int>(order, static_cast<int>(column.size()) - 1);
    for (int p = 1; p <= levels; ++p) {
        std::vector<double> next;
        for (std::size_t k = 0; k + 1 < column.size(); ++k) {
            // step ratio between the two samples combined at this level
            const double q = steps[k + p] / steps[k + p - 1];
            const double qp = std::pow(q, p);
            next.push_back((column[k + 1] - qp * column[k]) / (1.0 - qp));
        }
        column = std::move(next);
    }
    return column.back();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body)
{
    const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace dirac
