#pragma once

#include "diskmix/core.hpp"
#include "diskmix/flow.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace diskmix {

/// Cell Q_ij of the level-M tiling: r in (i h, (i+1) h] with h = 2^-M, split
/// into i+1 equal sectors theta in 2pi (j/(i+1), (j+1)/(i+1)]. Q_00 is the
/// disk of radius h.
struct AnnularTile {
    int M = 1;
    int i = 0;
    int j = 0;
    double r_lo = 0.0;
    double r_hi = 0.0;
    double theta_lo = 0.0;
    double theta_hi = two_pi;

    [[nodiscard]] double area() const { return 0.5 * (r_hi * r_hi - r_lo * r_lo) * (theta_hi - theta_lo); }

    [[nodiscard]] double diameter() const { return sector_diameter(r_lo, r_hi, theta_hi - theta_lo); }

    [[nodiscard]] PolarPoint centroid() const { return {0.5 * (r_lo + r_hi), 0.5 * (theta_lo + theta_hi)}; }

    /// Diameter of the annular sector {r_lo <= r <= r_hi, |angle| <= width/2}.
    static double sector_diameter(double r_lo, double r_hi, double width) {
        if (width >= pi) return 2.0 * r_hi;
        const double chord_outer = 2.0 * r_hi * std::sin(0.5 * width);
        const double cross = std::sqrt(std::max(0.0, r_lo * r_lo + r_hi * r_hi - 2.0 * r_lo * r_hi * std::cos(width)));
        return std::max({chord_outer, cross, r_hi - r_lo});
    }
};

inline void check_level(int M) {
    if (M < 0 || M > 24) throw DomainError("tiling level out of range: " + std::to_string(M));
}

inline AnnularTile make_tile(int M, int i, int j) {
    check_level(M);
    const int n = 1 << M;
    if (i < 0 || i >= n || j < 0 || j > i) throw DomainError("tile index out of range");
    AnnularTile q;
    q.M = M;
    q.i = i;
    q.j = j;
    q.r_lo = std::ldexp(static_cast<double>(i), -M);
    q.r_hi = std::ldexp(static_cast<double>(i + 1), -M);
    q.theta_lo = two_pi * j / (i + 1);
    q.theta_hi = j == i ? two_pi : two_pi * (j + 1) / (i + 1);
    return q;
}

inline std::size_t tile_count(int M) {
    check_level(M);
    const std::size_t n = std::size_t{1} << M;
    return n * (n + 1) / 2;
}

/// All tiles of level M, ordered by (i, j).
inline std::vector<AnnularTile> build_tiling(int M) {
    if (M < 1) throw DomainError("build_tiling needs M >= 1");
    check_level(M);
    std::vector<AnnularTile> tiles;
    tiles.reserve(tile_count(M));
    const int n = 1 << M;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) tiles.push_back(make_tile(M, i, j));
    return tiles;
}

/// Position of tile (i, j) in build_tiling(M).
inline std::size_t tile_index(int i, int j) { return static_cast<std::size_t>(i) * (i + 1) / 2 + j; }

/// Indices (i, j) of the tile containing p. Intervals are open below and
/// closed above; r = 0 belongs to (0, 0).
inline std::pair<int, int> locate(PolarPoint p, int M) {
    check_level(M);
    if (p.r > 1.0) throw DomainError("locate: radius " + std::to_string(p.r) + " outside the unit disk");
    if (p.r < 0.0) throw DomainError("locate: negative radius");
    const int n = 1 << M;
    const int i = std::clamp(static_cast<int>(std::ceil(std::ldexp(p.r, M))) - 1, 0, n - 1);
    double u = normalize_angle(p.theta);
    if (u == 0.0) u = two_pi;
    const int j = std::clamp(static_cast<int>(std::ceil(u * (i + 1) / two_pi)) - 1, 0, i);
    return {i, j};
}

/// Radial slice D^k of a level-M tile at fine level N >= M.
struct SubTile {
    AnnularTile parent;
    int N = 0;
    int k = 0;
    double r_lo = 0.0;
    double r_hi = 0.0;

    [[nodiscard]] double area() const { return 0.5 * (r_hi * r_hi - r_lo * r_lo) * (parent.theta_hi - parent.theta_lo); }
};

inline std::vector<SubTile> subtiles(const AnnularTile& q, int N) {
    if (N < q.M) throw DomainError("subtiles needs N >= M");
    check_level(N);
    const int count = 1 << (N - q.M);
    std::vector<SubTile> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        SubTile s{q, N, k, q.r_lo + std::ldexp(static_cast<double>(k), -N), q.r_lo + std::ldexp(static_cast<double>(k + 1), -N)};
        if (k + 1 == count) s.r_hi = q.r_hi;
        out.push_back(s);
    }
    return out;
}

/// max over tiles of level <= max_level of diameter * 2^M.
inline double tile_diameter_constant(int max_level = 8) {
    double c = 0.0;
    for (int M = 1; M <= max_level; ++M)
        for (const auto& q : build_tiling(M)) c = std::max(c, std::ldexp(q.diameter(), M));
    return c;
}

// ---------------------------------------------------------------------------
// Quadrature over polar rectangles

namespace detail {

/// Sorted, de-duplicated cut points strictly inside (a, b), with a and b
/// prepended and appended.
inline std::vector<double> panel_edges(double a, double b, std::vector<double> cuts) {
    std::vector<double> out{a};
    std::sort(cuts.begin(), cuts.end());
    const double tol = 1e-14 * std::max(1.0, std::abs(b - a));
    for (double c : cuts)
        if (c > out.back() + tol && c < b - tol) out.push_back(c);
    out.push_back(b);
    return out;
}

/// Points a + 2 pi k (any integer k) inside (lo, hi).
inline void append_periodic_hits(std::vector<double>& cuts, double a, double lo, double hi) {
    const double k0 = std::ceil((lo - a) / two_pi);
    for (double k = k0; a + two_pi * k < hi; k += 1.0) cuts.push_back(a + two_pi * k);
}

inline std::vector<double> uniform_cuts(double a, double b, int panels) {
    std::vector<double> cuts;
    for (int p = 1; p < panels; ++p) cuts.push_back(a + (b - a) * p / panels);
    return cuts;
}

} // namespace detail

/// Integral of rho(t, .) r dr dtheta over r in [r_lo, r_hi], theta in
/// [theta_lo, theta_hi], by tensor Gauss-Legendre with pointwise evaluation.
///
/// Step-radial data: r is split at annulus edges and at the radii where a
/// pulled-back profile breakpoint crosses theta_lo or theta_hi; theta is split
/// at the pulled-back breakpoints. Every panel then has a polynomial
/// integrand, so the result is exact up to rounding. Other data are panelled
/// in proportion to the oscillation t * bandwidth.
///
/// `weight(r, theta)` multiplies the integrand; a nonconstant weight adds
/// angular panels of width at most pi/8 and the result is then exact only up
/// to the weight's quadrature error.
template <class Weight>
double sector_integral_quadrature(const FieldSnapshot& snap, double r_lo, double r_hi, double theta_lo, double theta_hi, int order,
                                  Weight&& weight, bool weighted = true) {
    if (order < 2) throw DomainError("tile quadrature order must be at least 2");
    if (!(r_hi > r_lo) || !(theta_hi > theta_lo)) return 0.0;
    const ScalarDatum& datum = snap.datum();
    const double t = snap.t();
    const double w = two_pi * t;
    const auto& rule = gauss_legendre(order);

    std::vector<double> r_cuts = datum.radial_breakpoints();
    const auto* step = datum.as_step();
    int theta_panels = 1;
    if (step != nullptr) {
        if (t > 0.0) {
            const std::size_t a0 = datum.annulus_index(std::nextafter(r_lo, 2.0));
            const std::size_t a1 = datum.annulus_index(r_hi);
            for (std::size_t a = a0; a <= a1; ++a) {
                const double lo = std::max(r_lo, step->edges[a]);
                const double hi = std::min(r_hi, step->edges[a + 1]);
                // theta_e - w r = b + 2 pi k  <=>  w r = theta_e - b - 2 pi k.
                for (double b : step->profiles[a].breakpoints()) {
                    for (double e : {theta_lo, theta_hi}) {
                        std::vector<double> hits;
                        detail::append_periodic_hits(hits, e - b, w * lo - two_pi, w * hi + two_pi);
                        for (double h : hits) {
                            const double r = h / w;
                            if (r > lo && r < hi) r_cuts.push_back(r);
                        }
                    }
                }
            }
        }
    } else {
        const int band = std::max(1, datum.angular_bandwidth());
        const int rp = 1 + static_cast<int>(std::ceil(2.0 * t * band * (r_hi - r_lo)));
        auto extra = detail::uniform_cuts(r_lo, r_hi, std::min(rp, 4096));
        r_cuts.insert(r_cuts.end(), extra.begin(), extra.end());
        theta_panels = 1 + static_cast<int>(std::ceil(band * (theta_hi - theta_lo) / pi));
    }
    const auto r_edges = detail::panel_edges(r_lo, r_hi, std::move(r_cuts));

    auto theta_integral = [&](double r) {
        std::vector<double> cuts;
        if (step != nullptr) {
            const auto& prof = step->profiles[datum.annulus_index(r)];
            for (double b : prof.breakpoints()) detail::append_periodic_hits(cuts, b + w * r, theta_lo, theta_hi);
        } else {
            cuts = detail::uniform_cuts(theta_lo, theta_hi, theta_panels);
        }
        if (weighted) {
            auto extra = detail::uniform_cuts(theta_lo, theta_hi, 1 + static_cast<int>((theta_hi - theta_lo) / (pi / 8.0)));
            cuts.insert(cuts.end(), extra.begin(), extra.end());
        }
        const auto edges = detail::panel_edges(theta_lo, theta_hi, std::move(cuts));
        double acc = 0.0;
        for (std::size_t p = 0; p + 1 < edges.size(); ++p)
            acc += integrate_gauss([&](double th) { return snap.value(r, th) * weight(r, th); }, edges[p], edges[p + 1], order);
        return acc;
    };

    double total = 0.0;
    for (std::size_t p = 0; p + 1 < r_edges.size(); ++p) {
        const double a = r_edges[p], b = r_edges[p + 1];
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double r = mid + half * rule.nodes[q];
            acc += rule.weights[q] * r * theta_integral(r);
        }
        total += half * acc;
    }
    return total;
}

inline double sector_integral_quadrature(const FieldSnapshot& snap, double r_lo, double r_hi, double theta_lo, double theta_hi,
                                         int order = 8) {
    return sector_integral_quadrature(
        snap, r_lo, r_hi, theta_lo, theta_hi, order, [](double, double) { return 1.0; }, false);
}

/// Average of rho(t, .) over the tile by tensor quadrature.
inline double tile_average_quadrature(const FieldSnapshot& snap, const AnnularTile& q, int order = 8) {
    return sector_integral_quadrature(snap, q.r_lo, q.r_hi, q.theta_lo, q.theta_hi, order) / q.area();
}

inline double subtile_average_quadrature(const FieldSnapshot& snap, const SubTile& d, int order = 8) {
    return sector_integral_quadrature(snap, d.r_lo, d.r_hi, d.parent.theta_lo, d.parent.theta_hi, order) / d.area();
}

/// Tile averages at level M, in build_tiling order, computed in parallel.
template <class AverageFn>
std::vector<double> tile_averages(const std::vector<AnnularTile>& tiles, AverageFn&& average) {
    std::vector<double> out(tiles.size());
    parallel_for(tiles.size(), [&](std::size_t k) { out[k] = average(tiles[k]); });
    return out;
}

/// Header `M,i,j,r_lo,r_hi,theta_lo,theta_hi,average`.
inline void write_tiles_csv(std::ostream& out, const std::vector<AnnularTile>& tiles, const std::vector<double>& averages) {
    if (tiles.size() != averages.size()) throw DomainError("write_tiles_csv: tiles and averages differ in length");
    out << "M,i,j,r_lo,r_hi,theta_lo,theta_hi,average\n" << std::setprecision(17);
    for (std::size_t k = 0; k < tiles.size(); ++k) {
        const auto& q = tiles[k];
        out << q.M << ',' << q.i << ',' << q.j << ',' << q.r_lo << ',' << q.r_hi << ',' << q.theta_lo << ',' << q.theta_hi << ','
            << averages[k] << '\n';
    }
}

inline void write_tiles_csv(const std::string& path, const std::vector<AnnularTile>& tiles, const std::vector<double>& averages) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    write_tiles_csv(out, tiles, averages);
}

} // namespace diskmix
