#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace diskmix {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An experiment configuration could not be parsed or validated.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct PolarPoint {
    double r = 0.0;
    double theta = 0.0;
};

struct CartesianVector {
    double x = 0.0;
    double y = 0.0;

    [[nodiscard]] double norm() const { return std::hypot(x, y); }
};

/// Nonnegative time of the flow.
class FlowTime {
public:
    constexpr FlowTime() = default;
    explicit FlowTime(double t) : t_(t) {
        if (!(t >= 0.0) || !std::isfinite(t))
            throw DomainError("flow time must be finite and nonnegative, got " + std::to_string(t));
    }

    [[nodiscard]] constexpr double value() const { return t_; }

private:
    double t_ = 0.0;
};

/// Floored modulo into [0, 2pi).
inline double normalize_angle(double a) {
    double v = std::fmod(a, two_pi);
    if (v < 0.0) v += two_pi;
    if (v >= two_pi) v -= two_pi;
    return v;
}

/// An angle together with the neighbouring multiples of 2pi. When the value is
/// itself a multiple of 2pi both folds coincide with it.
struct AngleFold {
    double value = 0.0;
    double floor_2pi = 0.0;
    double ceil_2pi = 0.0;

    static AngleFold of(double a) {
        const double q = a / two_pi;
        return {a, two_pi * std::floor(q), two_pi * std::ceil(q)};
    }
};

inline CartesianVector to_cartesian(PolarPoint p) {
    return {p.r * std::cos(p.theta), p.r * std::sin(p.theta)};
}

inline PolarPoint to_polar(CartesianVector v) {
    return {std::hypot(v.x, v.y), normalize_angle(std::atan2(v.y, v.x))};
}

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

namespace detail {

inline GaussRule build_gauss_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

} // namespace detail

inline constexpr int max_gauss_order = 128;

/// Cached Gauss-Legendre rule of the given order (1..128).
inline const GaussRule& gauss_legendre(int order) {
    static const std::vector<GaussRule> rules = [] {
        std::vector<GaussRule> all(max_gauss_order + 1);
        all[1] = GaussRule{{0.0}, {2.0}};
        for (int n = 2; n <= max_gauss_order; ++n) all[static_cast<std::size_t>(n)] = detail::build_gauss_rule(n);
        return all;
    }();
    if (order < 1 || order > max_gauss_order)
        throw DomainError("Gauss-Legendre order out of range: " + std::to_string(order));
    return rules[static_cast<std::size_t>(order)];
}

template <class F>
double integrate_gauss(F&& f, double a, double b, int order) {
    const auto& rule = gauss_legendre(order);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
    return sum * half;
}

/// Worker count: DISKMIX_THREADS if set and positive, otherwise the hardware
/// concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("DISKMIX_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1U : hw;
}

/// Runs body(i) for i in [0, n) across up to thread_count() threads. Iterations
/// must be independent.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += workers) body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

inline bool is_power_of_two(long long v) { return v > 0 && (v & (v - 1)) == 0; }

} // namespace diskmix
