#pragma once

#include "diskmix/core.hpp"
#include "diskmix/flow.hpp"
#include "diskmix/tiling.hpp"

#include <complex>
#include <vector>

namespace diskmix {

// Negative Sobolev norms by duality: ||rho||_{H^-1 dot}^2 = int |grad xi|^2 where
// -Laplace xi = rho with zero normal derivative on the unit circle. Writing
// rho = sum_m rho_m(r) e^{i m theta}, each angular mode solves
//   -(1/r)(r xi_m')' + (m^2 / r^2) xi_m = rho_m,   xi_m'(1) = 0,
// and the norm is 2 pi sum_m int rho_m conj(xi_m) r dr. The radial problem is
// discretized by cell-centred finite volumes on a uniform grid; the loads are
// exact cell integrals of rho_m r.

struct HMinusOneOptions {
    int radial_resolution = 512;
    int mode_count = 64;
    /// Refine the radial grid to at least cells_per_wavelength * t cells, since
    /// rho_m oscillates in r with wavelength 1/(m t).
    bool adapt_to_time = true;
    double cells_per_wavelength = 4.0;
    int max_radial_resolution = 1 << 16;
    /// Solve (-Laplace + 1) xi = rho instead, giving the inhomogeneous norm.
    bool inhomogeneous = false;
    bool keep_mode_solutions = false;
};

struct NeumannSolve {
    double norm_value = 0.0;
    /// max over modes of |A xi - b| / |b|.
    double residual = 0.0;
    /// |sum_m xi^H A xi - b^H xi| relative to the energy.
    double duality_gap = 0.0;
    int radial_resolution = 0;
    int mode_count = 0;
    /// The m = 0 load vanished (zero circular means) and was not solved.
    bool zero_mode_vanished = false;
    std::vector<std::vector<std::complex<double>>> mode_solutions;
};

namespace detail {

/// int_{lo}^{hi} e^{-i q r} r dr.
inline std::complex<double> oscillatory_moment(double q, double lo, double hi) {
    using namespace std::complex_literals;
    if (std::abs(q) * (hi - lo) <= 1.0) {
        return integrate_gauss([&](double r) { return r * std::cos(q * r); }, lo, hi, 10) -
               1i * integrate_gauss([&](double r) { return r * std::sin(q * r); }, lo, hi, 10);
    }
    auto prim = [q](double r) { return std::exp(-1i * q * r) * (1i * r / q + 1.0 / (q * q)); };
    return prim(hi) - prim(lo);
}

/// Loads b_k = int_cell rho_m(t, r) r dr for every cell.
inline std::vector<std::complex<double>> mode_loads(const FieldSnapshot& snap, int m, int n) {
    const double h = 1.0 / n;
    std::vector<std::complex<double>> b(static_cast<std::size_t>(n), 0.0);
    const ScalarDatum& datum = snap.datum();
    const double q = m * two_pi * snap.t();
    if (const auto* step = datum.as_step()) {
        for (std::size_t a = 0; a < step->profiles.size(); ++a) {
            const std::complex<double> coef = step->profiles[a].fourier_coefficient(m);
            if (coef == 0.0) continue;
            const double lo = step->edges[a], hi = step->edges[a + 1];
            const int k0 = std::max(0, static_cast<int>(std::floor(lo * n)));
            const int k1 = std::min(n - 1, static_cast<int>(std::ceil(hi * n)) - 1);
            for (int k = k0; k <= k1; ++k) {
                const double c0 = std::max(lo, k * h), c1 = std::min(hi, (k + 1) * h);
                if (c1 > c0) b[static_cast<std::size_t>(k)] += coef * oscillatory_moment(q, c0, c1);
            }
        }
        return b;
    }
    const std::vector<double> breaks = datum.radial_breakpoints();
    const int panels = 1 + static_cast<int>(std::ceil(std::abs(q) * h));
    for (int k = 0; k < n; ++k) {
        std::vector<double> cuts;
        for (double x : breaks)
            if (x > k * h && x < (k + 1) * h) cuts.push_back(x);
        for (int p = 1; p < panels; ++p) cuts.push_back(k * h + h * p / panels);
        const auto edges = panel_edges(k * h, (k + 1) * h, std::move(cuts));
        std::complex<double> acc = 0.0;
        for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
            acc += integrate_gauss([&](double r) { return r * snap.angular_mode(r, m).real(); }, edges[p], edges[p + 1], 10);
            acc += std::complex<double>(0.0, 1.0) *
                   integrate_gauss([&](double r) { return r * snap.angular_mode(r, m).imag(); }, edges[p], edges[p + 1], 10);
        }
        b[static_cast<std::size_t>(k)] = acc;
    }
    return b;
}

/// Symmetric tridiagonal operator of one mode: diag[k], off[k] couples k, k+1.
struct RadialOperator {
    std::vector<double> diag;
    std::vector<double> off;
};

inline RadialOperator radial_operator(int m, int n, double mass) {
    const double h = 1.0 / n;
    RadialOperator A;
    A.diag.assign(static_cast<std::size_t>(n), 0.0);
    A.off.assign(static_cast<std::size_t>(n > 0 ? n - 1 : 0), 0.0);
    for (int f = 1; f < n; ++f) {
        const double coupling = f * h / h;
        A.off[static_cast<std::size_t>(f - 1)] = -coupling;
        A.diag[static_cast<std::size_t>(f - 1)] += coupling;
        A.diag[static_cast<std::size_t>(f)] += coupling;
    }
    for (int k = 0; k < n; ++k) {
        const double c = (k + 0.5) * h;
        A.diag[static_cast<std::size_t>(k)] += static_cast<double>(m) * m * h / c + mass * c * h;
    }
    return A;
}

inline std::vector<std::complex<double>> thomas_solve(const RadialOperator& A, const std::vector<std::complex<double>>& b) {
    const std::size_t n = b.size();
    std::vector<double> c(n, 0.0);
    std::vector<std::complex<double>> d(n);
    double denom = A.diag[0];
    c[0] = n > 1 ? A.off[0] / denom : 0.0;
    d[0] = b[0] / denom;
    for (std::size_t k = 1; k < n; ++k) {
        denom = A.diag[k] - A.off[k - 1] * c[k - 1];
        if (k + 1 < n) c[k] = A.off[k] / denom;
        d[k] = (b[k] - A.off[k - 1] * d[k - 1]) / denom;
    }
    for (std::size_t k = n - 1; k-- > 0;) d[k] -= c[k] * d[k + 1];
    return d;
}

inline std::vector<std::complex<double>> apply(const RadialOperator& A, const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> y(n);
    for (std::size_t k = 0; k < n; ++k) {
        y[k] = A.diag[k] * x[k];
        if (k > 0) y[k] += A.off[k - 1] * x[k - 1];
        if (k + 1 < n) y[k] += A.off[k] * x[k + 1];
    }
    return y;
}

inline double vector_norm(const std::vector<std::complex<double>>& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

} // namespace detail

/// Radial resolution actually used for a snapshot. Radial data carry no
/// angular modes, so transport never refines their grid.
inline int effective_radial_resolution(const HMinusOneOptions& opt, const FieldSnapshot& snap) {
    const double t = snap.t();
    int n = opt.radial_resolution;
    if (opt.adapt_to_time && snap.datum().angular_bandwidth() > 0) {
        const double want = opt.cells_per_wavelength * t;
        while (n < want && n < opt.max_radial_resolution) n *= 2;
    }
    return n;
}

/// H^-1 dot norm of rho(t, .) (or the inhomogeneous norm when requested).
/// Throws DomainError when rho has nonzero integral over the disk.
inline NeumannSolve h_minus_one_norm(const FieldSnapshot& snap, HMinusOneOptions opt = {}) {
    if (opt.radial_resolution < 64) throw DomainError("H^-1 solve needs at least 64 radial cells");
    if (opt.mode_count < 32) throw DomainError("H^-1 solve needs at least 32 angular modes");
    const int n = effective_radial_resolution(opt, snap);
    const double h = 1.0 / n;
    const double scale = std::max(snap.sup_norm(), 1e-300);
    NeumannSolve out;
    out.radial_resolution = n;
    out.mode_count = opt.mode_count;
    if (opt.keep_mode_solutions) out.mode_solutions.resize(static_cast<std::size_t>(opt.mode_count) + 1);

    const int modes = opt.mode_count + 1;
    std::vector<double> energy(static_cast<std::size_t>(modes), 0.0), pairing(static_cast<std::size_t>(modes), 0.0),
        residual(static_cast<std::size_t>(modes), 0.0);
    std::vector<std::vector<std::complex<double>>> kept(static_cast<std::size_t>(modes));
    bool zero_mode_vanished = false;

    parallel_for(static_cast<std::size_t>(modes), [&](std::size_t mi) {
        const int m = static_cast<int>(mi);
        const auto b = detail::mode_loads(snap, m, n);
        const double load_scale = detail::vector_norm(b);
        if (m == 0 && !opt.inhomogeneous) {
            // Neumann compatibility: the disk integral of rho must vanish.
            std::complex<double> total = 0.0;
            for (const auto& z : b) total += z;
            if (std::abs(total) > 1e-10 * scale) {
                throw DomainError("H^-1 norm needs mean-free data; disk integral is " + std::to_string(two_pi * total.real()));
            }
            if (load_scale <= 1e-13 * scale * h) {
                zero_mode_vanished = true;
                return;
            }
            // r xi_0' = -B(r) with B the running load, so int |xi_0'|^2 r dr = int B^2 / r dr.
            std::complex<double> run = 0.0;
            std::vector<std::complex<double>> xi(static_cast<std::size_t>(n), 0.0);
            double e = 0.0;
            for (int f = 1; f < n; ++f) {
                run += b[static_cast<std::size_t>(f - 1)];
                const double rf = f * h;
                e += h * std::norm(run) / rf;
                xi[static_cast<std::size_t>(f)] = xi[static_cast<std::size_t>(f - 1)] - run * h / rf;
            }
            energy[0] = e;
            std::complex<double> mean = 0.0;
            double wsum = 0.0;
            for (int k = 0; k < n; ++k) {
                mean += xi[static_cast<std::size_t>(k)] * ((k + 0.5) * h * h);
                wsum += (k + 0.5) * h * h;
            }
            for (auto& z : xi) z -= mean / wsum;
            std::complex<double> pr = 0.0;
            for (int k = 0; k < n; ++k) pr += std::conj(b[static_cast<std::size_t>(k)]) * xi[static_cast<std::size_t>(k)];
            pairing[0] = pr.real();
            if (opt.keep_mode_solutions) kept[0] = std::move(xi);
            return;
        }
        if (load_scale == 0.0) return;
        const auto A = detail::radial_operator(m, n, opt.inhomogeneous ? 1.0 : 0.0);
        const auto xi = detail::thomas_solve(A, b);
        const auto Ax = detail::apply(A, xi);
        std::vector<std::complex<double>> r(b.size());
        std::complex<double> bx = 0.0, xax = 0.0;
        for (std::size_t k = 0; k < b.size(); ++k) {
            r[k] = Ax[k] - b[k];
            bx += std::conj(b[k]) * xi[k];
            xax += std::conj(xi[k]) * Ax[k];
        }
        residual[mi] = detail::vector_norm(r) / load_scale;
        pairing[mi] = bx.real();
        energy[mi] = xax.real();
        if (opt.keep_mode_solutions) kept[mi] = xi;
    });

    double e_total = 0.0, p_total = 0.0;
    for (int m = 0; m < modes; ++m) {
        const double weight = m == 0 ? 1.0 : 2.0;
        e_total += weight * energy[static_cast<std::size_t>(m)];
        p_total += weight * pairing[static_cast<std::size_t>(m)];
        out.residual = std::max(out.residual, residual[static_cast<std::size_t>(m)]);
    }
    out.zero_mode_vanished = zero_mode_vanished;
    out.norm_value = std::sqrt(two_pi * std::max(e_total, 0.0));
    out.duality_gap = e_total > 0.0 ? std::abs(e_total - p_total) / e_total : 0.0;
    if (opt.keep_mode_solutions) out.mode_solutions = std::move(kept);
    return out;
}

inline NeumannSolve h_minus_one_norm(const ScalarDatum& datum, FlowTime t, HMinusOneOptions opt = {}) {
    return h_minus_one_norm(FieldSnapshot(datum, t), opt);
}

} // namespace diskmix
