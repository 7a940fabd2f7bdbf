#pragma once

#include "diskmix/core.hpp"
#include "diskmix/flow.hpp"
#include "diskmix/tiling.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

namespace diskmix {

struct BallQuadrature {
    int order = 6;
    /// Panels per unit of t * (radial extent) * angular bandwidth.
    double panels_per_oscillation = 2.0;
    int min_panels = 4;
};

namespace detail {

/// Root of g in [a, b] given g(a) and g(b) of opposite sign (Illinois), to
/// |g| <= tol.
template <class G>
double bracketed_root(G&& g, double a, double b, double ga, double gb, double tol = 1e-11) {
    int side = 0;
    for (int it = 0; it < 60; ++it) {
        const double c = (a * gb - b * ga) / (gb - ga);
        const double gc = g(c);
        if (std::abs(gc) <= tol) return c;
        if ((gc > 0.0) == (gb > 0.0)) {
            b = c;
            gb = gc;
            if (side == -1) ga *= 0.5;
            side = -1;
        } else {
            a = c;
            ga = gc;
            if (side == 1) gb *= 0.5;
            side = 1;
        }
        if (std::abs(b - a) < 1e-14) break;
    }
    return 0.5 * (a + b);
}

} // namespace detail

/// Average of rho(t, .) over the disk of radius eps centred at (cx, cy), with
/// rho = 0 outside the unit disk.
///
/// In polar coordinates the ball meets the circle of radius r in the arc
/// |theta - phi_c| <= w(r), w = acos((r^2 + d^2 - eps^2) / (2 r d)), so the
/// average is (1 / pi eps^2) int r A_r(phi_c - w, phi_c + w) dr with A_r the
/// exact angular integral of the snapshot. The substitution
/// r = lo + (hi - lo)(1 - cos(pi s)) / 2 removes the square-root endpoint
/// behaviour of w; panels in s are split at the datum's radial jumps. For
/// step-radial data the panels are further split where an arc end crosses a
/// pulled-back profile breakpoint, so each piece has a smooth integrand.
inline double ball_average(const FieldSnapshot& snap, double cx, double cy, double eps, const BallQuadrature& quad = {}) {
    if (!(eps > 0.0)) throw DomainError("ball radius must be positive");
    const double d = std::hypot(cx, cy);
    if (d >= 1.0 + eps) return 0.0;
    const ScalarDatum& datum = snap.datum();
    const auto* step = datum.as_step();
    const std::vector<double> jumps = datum.radial_breakpoints();
    double total = 0.0;

    // Circles entirely inside the ball.
    if (d < eps && !datum.zero_circular_mean()) {
        const double hi = std::min(eps - d, 1.0);
        const auto edges = detail::panel_edges(0.0, hi, jumps);
        for (std::size_t p = 0; p + 1 < edges.size(); ++p)
            total += integrate_gauss([&](double r) { return r * snap.angular_integral(r, 0.0, two_pi); }, edges[p], edges[p + 1],
                                     quad.order);
    }

    const double lo = std::abs(d - eps);
    const double hi = std::min(d + eps, 1.0);
    if (!(d > 0.0 && hi > lo)) return total / (pi * eps * eps);

    const double phi = std::atan2(cy, cx);
    const double span = hi - lo;
    const double omega = two_pi * snap.t();
    const double two_d = 2.0 * d;
    auto r_of = [&](double s) { return lo + 0.5 * span * (1.0 - std::cos(pi * s)); };
    auto half_width = [&](double r) { return std::acos(std::clamp((r * r + d * d - eps * eps) / (two_d * r), -1.0, 1.0)); };
    auto s_of_r = [&](double r) { return std::acos(std::clamp(1.0 - 2.0 * (r - lo) / span, -1.0, 1.0)) / pi; };

    const double band = std::max(1, datum.angular_bandwidth());
    const double periods = step != nullptr ? snap.t() * span : snap.t() * span * band * 0.5 * pi * quad.panels_per_oscillation;
    const int panels = quad.min_panels + static_cast<int>(std::ceil(periods));
    std::vector<double> cuts = detail::uniform_cuts(0.0, 1.0, panels);
    for (double x : jumps)
        if (x > lo && x < hi) cuts.push_back(s_of_r(x));
    auto edges = detail::panel_edges(0.0, 1.0, std::move(cuts));

    if (step != nullptr && omega > 0.0) {
        // Arc ends phi_c +- w(r) - omega r meeting b_k + 2 pi n.
        std::vector<double> kinks;
        for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
            const double sa = edges[p], sb = edges[p + 1];
            const auto& prof = step->profiles[datum.annulus_index(r_of(0.5 * (sa + sb)))];
            if (prof.piece_count() == 1) continue;
            for (double sign : {-1.0, 1.0}) {
                auto g = [&](double s) {
                    const double r = r_of(s);
                    return phi + sign * half_width(r) - omega * r;
                };
                const double ga = g(sa), gb = g(sb);
                const double gmin = std::min(ga, gb), gmax = std::max(ga, gb);
                for (std::size_t k = 0; k + 1 < prof.breakpoints().size(); ++k) {
                    const double b = prof.breakpoints()[k];
                    for (double n = std::ceil((gmin - b) / two_pi); b + two_pi * n < gmax; n += 1.0) {
                        const double level = b + two_pi * n;
                        if (level <= gmin) continue;
                        kinks.push_back(detail::bracketed_root([&](double s) { return g(s) - level; }, sa, sb, ga - level, gb - level));
                    }
                }
            }
        }
        if (!kinks.empty()) {
            kinks.insert(kinks.end(), edges.begin() + 1, edges.end() - 1);
            edges = detail::panel_edges(0.0, 1.0, std::move(kinks));
        }
    }

    const auto& rule = gauss_legendre(quad.order);
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double a = edges[p], b = edges[p + 1];
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        const StepProfile* prof = step != nullptr ? &step->profiles[datum.annulus_index(r_of(mid))] : nullptr;
        double acc = 0.0;
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const double s = mid + half * rule.nodes[k];
            const double r = r_of(s);
            if (r <= 0.0) continue;
            const double jac = 0.5 * span * pi * std::sin(pi * s);
            const double w = half_width(r);
            const double arc = prof != nullptr ? prof->integral_over(phi - w - omega * r, phi + w - omega * r)
                                               : snap.angular_integral(r, phi - w, phi + w);
            acc += rule.weights[k] * r * jac * arc;
        }
        total += half * acc;
    }
    return total / (pi * eps * eps);
}

// ---------------------------------------------------------------------------
// Raster route: cell-averaged Cartesian raster convolved with a disk kernel.

/// Values on the cell centres of an n x n grid over [-extent, extent]^2,
/// row-major with y outermost.
struct CartesianField {
    int n = 0;
    double extent = 1.0;
    std::vector<double> values;

    [[nodiscard]] double cell() const { return 2.0 * extent / n; }
    [[nodiscard]] double coordinate(int i) const { return -extent + (i + 0.5) * cell(); }
    [[nodiscard]] double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * n + ix]; }
};

/// Cell averages of rho(t, .) from `supersample`^2 points per cell.
inline CartesianField rasterize(const FieldSnapshot& snap, int n, double extent, int supersample = 2) {
    if (n < 8 || supersample < 1) throw DomainError("raster too small");
    CartesianField f{n, extent, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)};
    const double h = f.cell();
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t iy) {
        for (int ix = 0; ix < n; ++ix) {
            double acc = 0.0;
            for (int a = 0; a < supersample; ++a)
                for (int b = 0; b < supersample; ++b) {
                    const double x = -extent + (ix + (a + 0.5) / supersample) * h;
                    const double y = -extent + (static_cast<double>(iy) + (b + 0.5) / supersample) * h;
                    acc += snap.value_cartesian(x, y);
                }
            f.values[iy * static_cast<std::size_t>(n) + static_cast<std::size_t>(ix)] = acc / (supersample * supersample);
        }
    });
    return f;
}

struct RasterSpec {
    int n = 1024;
    int supersample = 2;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace detail

/// Ball averages at every raster cell centre over [-(1+eps), 1+eps]^2, by FFT
/// convolution with the area-weighted indicator of the eps-disk. Throws when
/// eps spans fewer than two cells.
inline CartesianField ball_average_field(const FieldSnapshot& snap, double eps, RasterSpec spec = {}) {
    const double extent = 1.0 + eps;
    const int n = spec.n;
    const double h = 2.0 * extent / n;
    if (eps < 2.0 * h) throw DomainError("ball radius below two raster cells; refine the raster");
    const CartesianField field = rasterize(snap, n, extent, spec.supersample);

    const int kr = static_cast<int>(std::ceil(eps / h)) + 1;
    const int kw = 2 * kr + 1;
    std::vector<double> kernel(static_cast<std::size_t>(kw) * kw, 0.0);
    constexpr int sub = 8;
    double ksum = 0.0;
    for (int a = 0; a < kw; ++a)
        for (int b = 0; b < kw; ++b) {
            int inside = 0;
            for (int u = 0; u < sub; ++u)
                for (int v = 0; v < sub; ++v) {
                    const double x = (a - kr - 0.5 + (u + 0.5) / sub) * h;
                    const double y = (b - kr - 0.5 + (v + 0.5) / sub) * h;
                    if (x * x + y * y <= eps * eps) ++inside;
                }
            const double wgt = static_cast<double>(inside) / (sub * sub);
            kernel[static_cast<std::size_t>(b) * kw + a] = wgt;
            ksum += wgt;
        }
    for (double& k : kernel) k /= ksum;

    const int P = n + kw;
    const int Pc = P / 2 + 1;
    const std::size_t real_size = static_cast<std::size_t>(P) * P;
    const std::size_t spec_size = static_cast<std::size_t>(P) * Pc;
    double* in_a = fftw_alloc_real(real_size);
    double* in_b = fftw_alloc_real(real_size);
    fftw_complex* fa = fftw_alloc_complex(spec_size);
    fftw_complex* fb = fftw_alloc_complex(spec_size);
    std::fill(in_a, in_a + real_size, 0.0);
    std::fill(in_b, in_b + real_size, 0.0);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) in_a[static_cast<std::size_t>(iy) * P + ix] = field.at(ix, iy);
    for (int b = 0; b < kw; ++b)
        for (int a = 0; a < kw; ++a) in_b[static_cast<std::size_t>(b) * P + a] = kernel[static_cast<std::size_t>(b) * kw + a];

    fftw_plan pa, pb, pinv;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        pa = fftw_plan_dft_r2c_2d(P, P, in_a, fa, FFTW_ESTIMATE);
        pb = fftw_plan_dft_r2c_2d(P, P, in_b, fb, FFTW_ESTIMATE);
        pinv = fftw_plan_dft_c2r_2d(P, P, fa, in_a, FFTW_ESTIMATE);
    }
    fftw_execute(pa);
    fftw_execute(pb);
    for (std::size_t k = 0; k < spec_size; ++k) {
        const double re = fa[k][0] * fb[k][0] - fa[k][1] * fb[k][1];
        const double im = fa[k][0] * fb[k][1] + fa[k][1] * fb[k][0];
        fa[k][0] = re;
        fa[k][1] = im;
    }
    fftw_execute(pinv);

    CartesianField out{n, extent, std::vector<double>(static_cast<std::size_t>(n) * n)};
    const double norm = 1.0 / static_cast<double>(real_size);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            out.values[static_cast<std::size_t>(iy) * n + ix] = in_a[static_cast<std::size_t>(iy + kr) * P + (ix + kr)] * norm;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(pa);
        fftw_destroy_plan(pb);
        fftw_destroy_plan(pinv);
    }
    fftw_free(in_a);
    fftw_free(in_b);
    fftw_free(fa);
    fftw_free(fb);
    return out;
}

} // namespace diskmix
