#pragma once

#include "diskmix/core.hpp"
#include "diskmix/scalar_data.hpp"

#include <complex>

namespace diskmix {

// The stationary shear u = 2 pi r^2 (sin theta, -cos theta) turns the circle
// of radius r at angular speed 2 pi r. Solutions are written as the pullback
// theta -> theta - 2 pi t r; following the velocity literally gives the mirror
// image theta + 2 pi t r. The two conventions differ by the reflection
// theta -> -theta, under which ball averages, tile averages over the reflected
// tiling and every norm used here are invariant.

inline CartesianVector velocity(PolarPoint p) {
    const double s = two_pi * p.r * p.r;
    return {s * std::sin(p.theta), -s * std::cos(p.theta)};
}

/// Angular displacement of the circle of radius r after time t.
inline double shear_angle(double r, FlowTime t) { return two_pi * t.value() * r; }

inline PolarPoint pullback_point(PolarPoint p, FlowTime t) {
    return {p.r, normalize_angle(p.theta - shear_angle(p.r, t))};
}

/// Inverse of pullback_point at the same t.
inline PolarPoint forward_point(PolarPoint p, FlowTime t) {
    return {p.r, normalize_angle(p.theta + shear_angle(p.r, t))};
}

/// rho(t, p) = rho_0(pullback of p); zero outside the closed unit disk.
inline double evaluate_solution(const ScalarDatum& datum, FlowTime t, PolarPoint p) {
    if (p.r > 1.0) return 0.0;
    const PolarPoint q = pullback_point(p, t);
    return datum.value(q.r, q.theta);
}

/// Time-t flow map in Cartesian coordinates (same convention as the pullback).
inline CartesianVector flow_map(CartesianVector x, FlowTime t) {
    const double r = x.norm();
    const double a = shear_angle(r, t);
    const double c = std::cos(a), s = std::sin(a);
    return {c * x.x - s * x.y, s * x.x + c * x.y};
}

/// Largest finite-difference stretching |Phi(x) - Phi(y)| / |x - y| over
/// probe pairs y = x + step d, with x on the circles r in {1/4, 1/2, 3/4, 1}
/// at `probe_count` angles and d among radial, tangential and diagonal
/// directions. Pairs leaving the disk are mirrored inward.
inline double lipschitz_estimate(FlowTime t, int probe_count = 16, double step = 1e-7) {
    if (probe_count < 1) throw DomainError("lipschitz_estimate needs at least one probe angle");
    if (!(step > 0.0 && step < 0.1)) throw DomainError("lipschitz_estimate step must lie in (0, 0.1)");
    constexpr double radii[] = {0.25, 0.5, 0.75, 1.0};
    double best = 0.0;
    for (double r : radii) {
        for (int k = 0; k < probe_count; ++k) {
            const double th = two_pi * (k + 0.5) / probe_count;
            const CartesianVector x = to_cartesian({r, th});
            const CartesianVector er{std::cos(th), std::sin(th)};
            const CartesianVector et{-std::sin(th), std::cos(th)};
            const CartesianVector dirs[] = {er, et, {(er.x + et.x) / std::sqrt(2.0), (er.y + et.y) / std::sqrt(2.0)},
                                            {(er.x - et.x) / std::sqrt(2.0), (er.y - et.y) / std::sqrt(2.0)}};
            for (const auto& d : dirs) {
                CartesianVector y{x.x + step * d.x, x.y + step * d.y};
                if (y.norm() > 1.0) y = {x.x - step * d.x, x.y - step * d.y};
                const CartesianVector fx = flow_map(x, t);
                const CartesianVector fy = flow_map(y, t);
                const double num = std::hypot(fx.x - fy.x, fx.y - fy.y);
                const double den = std::hypot(x.x - y.x, x.y - y.y);
                best = std::max(best, num / den);
            }
        }
    }
    return best;
}

/// rho(t, .) as the pair (datum, t).
class FieldSnapshot {
public:
    FieldSnapshot(ScalarDatum datum, FlowTime t) : datum_(std::move(datum)), t_(t) {}

    [[nodiscard]] const ScalarDatum& datum() const { return datum_; }
    [[nodiscard]] FlowTime time() const { return t_; }
    [[nodiscard]] double t() const { return t_.value(); }

    /// Sup norm; transport preserves it.
    [[nodiscard]] double sup_norm() const { return datum_.sup_norm(); }

    [[nodiscard]] double value(double r, double theta) const { return evaluate_solution(datum_, t_, {r, theta}); }
    double operator()(PolarPoint p) const { return value(p.r, p.theta); }

    [[nodiscard]] double value_cartesian(double x, double y) const {
        const double r = std::hypot(x, y);
        if (r > 1.0) return 0.0;
        return value(r, std::atan2(y, x));
    }

    /// Integral of rho(t, r, .) over [a, b]; the shift is applied without
    /// reducing angles so no wrap-around is lost.
    [[nodiscard]] double angular_integral(double r, double a, double b) const {
        const double s = shear_angle(r, t_);
        return datum_.angular_integral(r, a - s, b - s);
    }

    /// (1/2pi) * integral of rho(t, r, theta) exp(-i m theta) d theta.
    [[nodiscard]] std::complex<double> angular_mode(double r, int m) const {
        return datum_.angular_mode(r, m) * std::polar(1.0, -m * shear_angle(r, t_));
    }

private:
    ScalarDatum datum_;
    FlowTime t_;
};

} // namespace diskmix
