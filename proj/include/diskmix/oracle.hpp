#pragma once

#include "diskmix/core.hpp"
#include "diskmix/flow.hpp"
#include "diskmix/scalar_data.hpp"
#include "diskmix/tiling.hpp"

#include <optional>
#include <string>
#include <vector>

namespace diskmix {

// Closed-form tile integrals for step-radial data. On one annulus
// rho(t, r, theta) = f(theta - 2 pi t r), and the substitution y = theta - 2 pi t r
// turns the radial integral into
//
//   int_{r_lo}^{r_hi} f(theta - 2 pi t r) r dr = (2 pi t)^-2 int_a^b f(y) (theta - y) dy
//
// with a = theta - 2 pi t r_hi < b = theta - 2 pi t r_lo. Splitting [a, b] at the
// multiples of 2pi gives two partial periods (I1) and a run of full periods
// (I2). For a mean-free f each full period contributes the same amount,
// int_0^2pi F, where F is the periodic antiderivative.

/// Antiderivatives of a mean-free step profile: F(y) = int_0^y f and
/// G(y) = int_0^y f(z) z dz on [0, 2pi].
class ProfileCalculus {
public:
    explicit ProfileCalculus(StepProfile profile) : profile_(std::move(profile)) {
        if (std::abs(profile_.integral()) > mean_free_tolerance * two_pi * std::max(1.0, profile_.sup_abs()))
            throw DomainError("ProfileCalculus needs a mean-free profile");
        g_period_ = profile_.moment_antiderivative(two_pi);
    }

    [[nodiscard]] const StepProfile& profile() const { return profile_; }

    /// F on [0, 2pi]; F(0) = F(2pi) = 0 up to rounding.
    [[nodiscard]] double F(double y) const { return profile_.antiderivative(y); }
    [[nodiscard]] double G(double y) const { return profile_.moment_antiderivative(y); }

    /// int_0^2pi F(y) dy = 2pi F(2pi) - G(2pi) = -G(2pi).
    [[nodiscard]] double F_int() const { return -g_period_; }

    /// int_{lo}^{hi} f(y) (theta - y) dy for lo <= hi inside one period
    /// [base, base + 2pi].
    [[nodiscard]] double partial_period(double theta, double base, double lo, double hi) const {
        const double zl = std::clamp(lo - base, 0.0, two_pi);
        const double zh = std::clamp(hi - base, 0.0, two_pi);
        const double theta_loc = theta - base;
        return theta_loc * (F(zh) - F(zl)) - (G(zh) - G(zl));
    }

private:
    StepProfile profile_;
    double g_period_ = 0.0;
};

namespace detail {

struct FoldedRange {
    double a;
    double b;
    double ceil_a;
    double floor_b;
    bool has_full_periods;
};

inline FoldedRange fold_range(double theta, FlowTime t, double r_lo, double r_hi) {
    if (!(t.value() > 0.0)) throw DomainError("I1/I2 terms need t > 0");
    if (!(r_lo < r_hi)) throw DomainError("I1/I2 terms need r_lo < r_hi");
    const double w = two_pi * t.value();
    const double a = theta - w * r_hi;
    const double b = theta - w * r_lo;
    const double ca = AngleFold::of(a).ceil_2pi;
    const double fb = AngleFold::of(b).floor_2pi;
    return {a, b, ca, fb, ca <= fb};
}

} // namespace detail

/// The two partial-period pieces int_a^{ceil a} + int_{floor b}^b of
/// f(y) (theta - y) dy, or the whole of int_a^b when [a, b] contains no
/// multiple of 2pi.
inline double boundary_term_I1(const ProfileCalculus& calc, double theta, FlowTime t, double r_lo, double r_hi) {
    const auto f = detail::fold_range(theta, t, r_lo, r_hi);
    if (!f.has_full_periods) {
        const double base = AngleFold::of(f.a).floor_2pi;
        return calc.partial_period(theta, base, f.a, f.b);
    }
    return calc.partial_period(theta, f.ceil_a - two_pi, f.a, f.ceil_a) + calc.partial_period(theta, f.floor_b, f.floor_b, f.b);
}

/// Full periods between ceil(a) and floor(b), each contributing int_0^2pi F.
inline double bulk_term_I2(const ProfileCalculus& calc, double theta, FlowTime t, double r_lo, double r_hi) {
    const auto f = detail::fold_range(theta, t, r_lo, r_hi);
    if (!f.has_full_periods) return 0.0;
    const double periods = std::round((f.floor_b - f.ceil_a) / two_pi);
    return periods * calc.F_int();
}

/// Integral of f(theta - 2 pi t r) r over the polar rectangle, for one
/// mean-free profile. The theta-integrand I1 + I2 is quadratic between the
/// angles where a or b crosses a profile breakpoint modulo 2pi, and each such
/// piece is integrated by Gauss-Legendre.
inline double exact_sector_integral(const ProfileCalculus& calc, double r_lo, double r_hi, double theta_lo, double theta_hi, FlowTime t,
                                    int theta_order = 8) {
    if (!(r_hi > r_lo) || !(theta_hi > theta_lo)) return 0.0;
    const auto& prof = calc.profile();
    if (t.value() == 0.0) return 0.5 * (r_hi * r_hi - r_lo * r_lo) * prof.integral_over(theta_lo, theta_hi);
    const double w = two_pi * t.value();
    std::vector<double> cuts;
    for (double bk : prof.breakpoints())
        for (double edge : {r_lo, r_hi}) detail::append_periodic_hits(cuts, bk + w * edge, theta_lo, theta_hi);
    const auto edges = detail::panel_edges(theta_lo, theta_hi, std::move(cuts));
    double acc = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p)
        acc += integrate_gauss(
            [&](double th) { return boundary_term_I1(calc, th, t, r_lo, r_hi) + bulk_term_I2(calc, th, t, r_lo, r_hi); }, edges[p],
            edges[p + 1], theta_order);
    return acc / (w * w);
}

namespace detail {

/// Integral of a step-radial rho(t) over r in [r_lo, r_hi], theta in
/// [theta_lo, theta_hi]; the range is split at annulus edges, and a profile
/// with nonzero mean mu contributes mu * area for its constant part.
inline double exact_step_integral(const ScalarDatum& datum, double r_lo, double r_hi, double theta_lo, double theta_hi, FlowTime t,
                                  int theta_order) {
    const auto* step = datum.as_step();
    if (step == nullptr) throw DomainError("exact tile averages need a step-radial datum");
    double total = 0.0;
    for (std::size_t a = 0; a < step->profiles.size(); ++a) {
        const double lo = std::max(r_lo, step->edges[a]);
        const double hi = std::min(r_hi, step->edges[a + 1]);
        if (!(hi > lo)) continue;
        const StepProfile& p = step->profiles[a];
        const double mu = p.mean();
        total += mu * 0.5 * (hi * hi - lo * lo) * (theta_hi - theta_lo);
        total += exact_sector_integral(ProfileCalculus(p.minus_mean()), lo, hi, theta_lo, theta_hi, t, theta_order);
    }
    return total;
}

} // namespace detail

inline double exact_tile_average(const ScalarDatum& datum, const AnnularTile& q, FlowTime t, int theta_order = 8) {
    return detail::exact_step_integral(datum, q.r_lo, q.r_hi, q.theta_lo, q.theta_hi, t, theta_order) / q.area();
}

inline double exact_subtile_average(const ScalarDatum& datum, const SubTile& d, FlowTime t, int theta_order = 8) {
    return detail::exact_step_integral(datum, d.r_lo, d.r_hi, d.parent.theta_lo, d.parent.theta_hi, t, theta_order) / d.area();
}

/// All exact tile averages at level M, in build_tiling order.
inline std::vector<double> exact_tile_averages(const ScalarDatum& datum, int M, FlowTime t) {
    const auto tiles = build_tiling(M);
    return tile_averages(tiles, [&](const AnnularTile& q) { return exact_tile_average(datum, q, t); });
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Which time threshold governs the tile-average bounds: level M finer than
/// the datum level N, or M <= N where tiles are cut into radial sub-tiles.
enum class TileRegime { Rotation, SubTiling };

inline const char* to_string(TileRegime r) { return r == TileRegime::Rotation ? "M>N" : "M<=N"; }

struct TileBoundReport {
    int M = 0;
    int N = 0;
    double t = 0.0;
    double kappa = 0.0;
    TileRegime regime = TileRegime::Rotation;
    double max_abs_average = 0.0;
    double sup_norm = 0.0;
    /// (kappa/4) ||rho||, threshold t >= C 2^M / kappa (M > N) or C 2^N / kappa.
    double kappa_bound = 0.0;
    bool kappa_bound_holds = false;
    /// 2^-M ||rho||, threshold t >= C 2^{2M} (M > N) or C 2^{M+N}.
    double fine_bound = 0.0;
    bool fine_bound_holds = false;
    /// t divided by the threshold scale of each bound: the C that t represents.
    double kappa_threshold_ratio = 0.0;
    double fine_threshold_ratio = 0.0;
};

inline TileBoundReport tile_average_bound_check(const ScalarDatum& datum, int M, FlowTime t, double kappa) {
    const auto* step = datum.as_step();
    if (step == nullptr || !step->level) throw DomainError("tile_average_bound_check needs a step-radial datum with a level");
    if (!(kappa > 0.0 && kappa < 1.0)) throw DomainError("accuracy kappa must lie in (0, 1)");
    TileBoundReport rep;
    rep.M = M;
    rep.N = *step->level;
    rep.t = t.value();
    rep.kappa = kappa;
    rep.regime = M > rep.N ? TileRegime::Rotation : TileRegime::SubTiling;
    rep.sup_norm = datum.sup_norm();
    rep.max_abs_average = max_abs(exact_tile_averages(datum, M, t));
    rep.kappa_bound = 0.25 * kappa * rep.sup_norm;
    rep.fine_bound = std::ldexp(rep.sup_norm, -M);
    rep.kappa_bound_holds = rep.max_abs_average <= rep.kappa_bound;
    rep.fine_bound_holds = rep.max_abs_average <= rep.fine_bound;
    const double kappa_scale = std::ldexp(1.0, rep.regime == TileRegime::Rotation ? M : rep.N) / kappa;
    const double fine_scale = std::ldexp(1.0, rep.regime == TileRegime::Rotation ? 2 * M : M + rep.N);
    rep.kappa_threshold_ratio = rep.t / kappa_scale;
    rep.fine_threshold_ratio = rep.t / fine_scale;
    return rep;
}

/// Empirical threshold: the first t of a doubling scan from which the chosen
/// bound holds at every later scanned time.
struct ThresholdCalibration {
    std::optional<double> first_time;
    std::optional<double> constant; // first_time / threshold scale
    std::vector<TileBoundReport> scan;
};

enum class TileBound { Kappa, Fine };

inline ThresholdCalibration calibrate_tile_threshold(const ScalarDatum& datum, int M, double kappa, TileBound which, double t_start,
                                                     double t_stop) {
    if (!(t_start > 0.0) || !(t_stop >= t_start)) throw DomainError("calibration needs 0 < t_start <= t_stop");
    ThresholdCalibration cal;
    for (double t = t_start; t <= t_stop * (1.0 + 1e-12); t *= 2.0) cal.scan.push_back(tile_average_bound_check(datum, M, FlowTime(t), kappa));
    for (std::size_t k = cal.scan.size(); k-- > 0;) {
        const auto& r = cal.scan[k];
        const bool ok = which == TileBound::Kappa ? r.kappa_bound_holds : r.fine_bound_holds;
        if (!ok) break;
        cal.first_time = r.t;
        cal.constant = which == TileBound::Kappa ? r.kappa_threshold_ratio : r.fine_threshold_ratio;
    }
    return cal;
}

} // namespace diskmix
