#pragma once

#include "diskmix/core.hpp"

#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace diskmix {

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Root-mean-square residual of log(value).
    double residual = 0.0;
    std::size_t points = 0;
    double t_min = 0.0;
    double t_max = 0.0;
};

/// Inclusive time window; unbounded by default.
struct TimeWindow {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();

    [[nodiscard]] bool contains(double t) const { return t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12); }
};

/// Least squares fit of log(value) = intercept + slope log(t) over the window.
/// Needs at least four points with strictly increasing t and positive values.
inline DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& series, TimeWindow window = {}) {
    std::vector<std::pair<double, double>> pts;
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& [t, v] : series) {
        if (!(t > prev)) throw DomainError("fit_decay_rate: times must increase");
        prev = t;
        if (!window.contains(t)) continue;
        if (!(t > 0.0)) throw DomainError("fit_decay_rate: times must be positive");
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("fit_decay_rate: values must be positive and finite");
        pts.emplace_back(std::log(t), std::log(v));
    }
    if (pts.size() < 4) throw DomainError("fit_decay_rate: needs at least 4 points in the window");
    const double n = static_cast<double>(pts.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    DecayFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (const auto& [x, y] : pts) {
        const double e = y - (fit.intercept + fit.slope * x);
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / n);
    fit.points = pts.size();
    fit.t_min = std::exp(pts.front().first);
    fit.t_max = std::exp(pts.back().first);
    return fit;
}

/// Earliest t0 in the series such that the fit over [t0, window.hi] has a
/// slope inside [slope_lo, slope_hi]; nullopt if no trailing window of four or
/// more points qualifies.
inline std::optional<double> earliest_window_entry(const std::vector<std::pair<double, double>>& series, TimeWindow window, double slope_lo,
                                                   double slope_hi) {
    for (const auto& [t0, v] : series) {
        (void)v;
        if (!window.contains(t0)) continue;
        TimeWindow w{t0, window.hi};
        std::size_t count = 0;
        for (const auto& [t, u] : series) count += w.contains(t) && u > 0.0 && std::isfinite(u) ? 1 : 0;
        if (count < 4) break;
        try {
            const DecayFit f = fit_decay_rate(series, w);
            if (f.slope >= slope_lo && f.slope <= slope_hi) return t0;
        } catch (const DomainError&) {
        }
    }
    return std::nullopt;
}

} // namespace diskmix
