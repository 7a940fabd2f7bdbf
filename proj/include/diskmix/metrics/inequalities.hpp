#pragma once

#include "diskmix/core.hpp"
#include "diskmix/flow.hpp"
#include "diskmix/metrics/h_minus_one.hpp"
#include "diskmix/oracle.hpp"
#include "diskmix/tiling.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace diskmix {

/// Tile averages of a snapshot at level M: closed form for step-radial data,
/// tensor quadrature otherwise.
inline std::vector<double> snapshot_tile_averages(const FieldSnapshot& snap, int M) {
    const auto tiles = build_tiling(M);
    if (snap.datum().as_step() != nullptr)
        return tile_averages(tiles, [&](const AnnularTile& q) { return exact_tile_average(snap.datum(), q, snap.time()); });
    return tile_averages(tiles, [&](const AnnularTile& q) { return tile_average_quadrature(snap, q); });
}

/// Diameter constant c with diam Q <= c 2^-M for every tile; the half annulus
/// i = 1 attains it.
/// Measured sup over M <= 8 of 2^M diam Q; tends to sqrt(1 + 4 pi^2) as M grows.
inline const double tile_diameter_c = tile_diameter_constant(8);

struct TileScaleBound {
    /// Finest level whose tile averages are all at most (kappa/2) ||rho||.
    std::optional<int> level;
    /// 8 c 2^-level / kappa, or +infinity when no level qualifies.
    double epsilon_bound = std::numeric_limits<double>::infinity();
};

/// Upper bound for the geometric scale from tile averages: if every tile of
/// level M averages at most (kappa/2) ||rho|| in absolute value, every ball of
/// radius 8 c 2^-M / kappa averages at most kappa ||rho||.
inline TileScaleBound tile_upper_bound_scale(const FieldSnapshot& snap, double kappa, int M_min, int M_max) {
    if (M_min < 1 || M_max < M_min) throw DomainError("tile_upper_bound_scale needs 1 <= M_min <= M_max");
    if (!(kappa > 0.0 && kappa < 1.0)) throw DomainError("accuracy kappa must lie in (0, 1)");
    const double limit = 0.5 * kappa * snap.sup_norm();
    TileScaleBound out;
    for (int M = M_max; M >= M_min; --M) {
        if (max_abs(snapshot_tile_averages(snap, M)) <= limit) {
            out.level = M;
            out.epsilon_bound = 8.0 * tile_diameter_c * std::ldexp(1.0, -M) / kappa;
            break;
        }
    }
    return out;
}

struct Mpc2Report {
    int M = 0;
    bool hypothesis_holds = false;
    double max_abs_average = 0.0;
    /// 2 ||rho|| 2^-M.
    double hypothesis_limit = 0.0;
    double h_minus_one = 0.0;
    /// ||rho||_{H^-1 dot} / (||rho|| 2^-M); reported even when the hypothesis fails.
    double empirical_constant = 0.0;
};

/// Checks |avg_Q rho| <= 2 ||rho|| 2^-M on every tile and reports the ratio
/// that bounds ||rho||_{H^-1 dot} by C ||rho|| 2^-M.
inline Mpc2Report mpc2_bound_check(const FieldSnapshot& snap, int M, HMinusOneOptions opt = {}) {
    Mpc2Report rep;
    rep.M = M;
    const double sup = snap.sup_norm();
    rep.max_abs_average = max_abs(snapshot_tile_averages(snap, M));
    rep.hypothesis_limit = 2.0 * sup * std::ldexp(1.0, -M);
    rep.hypothesis_holds = rep.max_abs_average <= rep.hypothesis_limit;
    rep.h_minus_one = h_minus_one_norm(snap, opt).norm_value;
    rep.empirical_constant = sup > 0.0 ? rep.h_minus_one / (sup * std::ldexp(1.0, -M)) : 0.0;
    return rep;
}

/// Smooth test function on the closed disk, in Cartesian coordinates.
struct TestFunction {
    std::function<double(double, double)> value;
    std::function<CartesianVector(double, double)> gradient;
};

struct PoincareReport {
    int M = 0;
    double max_ratio = 0.0;
    int worst_i = 0;
    int worst_j = 0;
    std::size_t degenerate_tiles = 0;
};

/// max over tiles of ||xi - xi_Q||_{L1(Q)} / (2^-M ||grad xi||_{L1(Q)}), by
/// sub-panelled Gauss quadrature on each tile. Tiles with vanishing gradient
/// but nonconstant xi are counted as degenerate and left out.
inline PoincareReport poincare_ratio(const TestFunction& xi, int M, int subdivisions = 4, int order = 6) {
    const auto tiles = build_tiling(M);
    const auto& rule = gauss_legendre(order);
    std::vector<double> ratio(tiles.size(), 0.0);
    std::vector<char> degenerate(tiles.size(), 0);
    parallel_for(tiles.size(), [&](std::size_t k) {
        const auto& q = tiles[k];
        struct Node {
            double w, v, g;
        };
        std::vector<Node> nodes;
        const double dr = (q.r_hi - q.r_lo) / subdivisions, dt = (q.theta_hi - q.theta_lo) / subdivisions;
        for (int a = 0; a < subdivisions; ++a)
            for (int b = 0; b < subdivisions; ++b)
                for (std::size_t u = 0; u < rule.size(); ++u)
                    for (std::size_t v = 0; v < rule.size(); ++v) {
                        const double r = q.r_lo + dr * (a + 0.5 + 0.5 * rule.nodes[u]);
                        const double th = q.theta_lo + dt * (b + 0.5 + 0.5 * rule.nodes[v]);
                        const double x = r * std::cos(th), y = r * std::sin(th);
                        const double w = 0.25 * rule.weights[u] * rule.weights[v] * r * dr * dt;
                        nodes.push_back({w, xi.value(x, y), xi.gradient(x, y).norm()});
                    }
        double area = 0.0, mean = 0.0;
        for (const auto& n : nodes) {
            area += n.w;
            mean += n.w * n.v;
        }
        mean /= area;
        double dev = 0.0, grad = 0.0;
        for (const auto& n : nodes) {
            dev += n.w * std::abs(n.v - mean);
            grad += n.w * n.g;
        }
        const double scale = std::ldexp(1.0, -M);
        if (dev <= 1e-12 * area * (1.0 + std::abs(mean))) {
            ratio[k] = 0.0;
        } else if (grad <= 1e-300) {
            degenerate[k] = 1;
        } else {
            ratio[k] = dev / (scale * grad);
        }
    });
    PoincareReport rep;
    rep.M = M;
    for (std::size_t k = 0; k < tiles.size(); ++k) {
        rep.degenerate_tiles += static_cast<std::size_t>(degenerate[k]);
        if (ratio[k] > rep.max_ratio) {
            rep.max_ratio = ratio[k];
            rep.worst_i = tiles[k].i;
            rep.worst_j = tiles[k].j;
        }
    }
    return rep;
}

/// int_{B_1} rho(t, x) phi(x) dx with phi in Cartesian coordinates, by the
/// same polar panelling as the tile quadrature, over the tiles of `level`.
inline double weak_pairing(const FieldSnapshot& snap, const std::function<double(double, double)>& phi, int level = 4, int order = 8) {
    const auto tiles = build_tiling(level);
    std::vector<double> part(tiles.size(), 0.0);
    parallel_for(tiles.size(), [&](std::size_t k) {
        const auto& q = tiles[k];
        part[k] = sector_integral_quadrature(snap, q.r_lo, q.r_hi, q.theta_lo, q.theta_hi, order,
                                             [&](double r, double th) { return phi(r * std::cos(th), r * std::sin(th)); });
    });
    double total = 0.0;
    for (double p : part) total += p;
    return total;
}

} // namespace diskmix
