#pragma once

#include "diskmix/core.hpp"
#include "diskmix/flow.hpp"
#include "diskmix/scalar_data.hpp"
#include "diskmix/tiling.hpp"

#include <string>
#include <vector>

namespace diskmix {

/// The datum averaged over every tile of level N: a step-radial datum whose
/// profile on annulus i has i+1 equal steps. Level 0 is the disk average.
inline ScalarDatum radial_approximation(const ScalarDatum& datum, int N, int order = 8) {
    if (N < 0) throw DomainError("radial_approximation needs N >= 0");
    check_level(N);
    const FieldSnapshot snap(datum, FlowTime(0.0));
    const int n = 1 << N;
    std::vector<std::vector<double>> averages(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        auto& row = averages[i];
        row.resize(i + 1);
        for (std::size_t j = 0; j <= i; ++j)
            row[j] = tile_average_quadrature(snap, make_tile(N, static_cast<int>(i), static_cast<int>(j)), order);
    });
    std::vector<double> edges(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) edges[static_cast<std::size_t>(k)] = std::ldexp(static_cast<double>(k), -N);
    std::vector<StepProfile> profiles;
    profiles.reserve(averages.size());
    for (auto& row : averages) profiles.push_back(StepProfile::equal_steps(std::move(row)));
    return ScalarDatum(ScalarDatum::StepRadial{std::move(edges), std::move(profiles), N}, datum.label() + "-tile-averaged");
}

struct ApproximationError {
    int N = 0;
    double l1 = 0.0;
    double linf = 0.0;
};

/// L1 and sampled L-infinity distance between a datum and its level-N tile
/// average. L1 uses sub-panelled Gauss quadrature on every tile, L-infinity a
/// lattice of `lattice` x `lattice` points per tile.
inline ApproximationError approximation_error(const ScalarDatum& datum, int N, int subdivisions = 4, int lattice = 17) {
    const ScalarDatum approx = radial_approximation(datum, N);
    const int n = 1 << N;
    std::vector<double> l1(static_cast<std::size_t>(n), 0.0), linf(static_cast<std::size_t>(n), 0.0);
    const auto& rule = gauss_legendre(6);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        const auto& prof = approx.as_step()->profiles[ii];
        for (int j = 0; j <= i; ++j) {
            const AnnularTile q = make_tile(N, i, j);
            const double c = prof.values()[static_cast<std::size_t>(j)];
            const double dr = (q.r_hi - q.r_lo) / subdivisions;
            const double dt = (q.theta_hi - q.theta_lo) / subdivisions;
            double acc = 0.0;
            for (int a = 0; a < subdivisions; ++a)
                for (int b = 0; b < subdivisions; ++b)
                    for (std::size_t u = 0; u < rule.size(); ++u)
                        for (std::size_t v = 0; v < rule.size(); ++v) {
                            const double r = q.r_lo + dr * (a + 0.5 + 0.5 * rule.nodes[u]);
                            const double th = q.theta_lo + dt * (b + 0.5 + 0.5 * rule.nodes[v]);
                            acc += 0.25 * rule.weights[u] * rule.weights[v] * r * std::abs(datum.value(r, th) - c);
                        }
            l1[ii] += acc * dr * dt;
            for (int a = 0; a < lattice; ++a)
                for (int b = 0; b < lattice; ++b) {
                    const double r = q.r_lo + (q.r_hi - q.r_lo) * (a + 0.5) / lattice;
                    const double th = q.theta_lo + (q.theta_hi - q.theta_lo) * (b + 0.5) / lattice;
                    linf[ii] = std::max(linf[ii], std::abs(datum.value(r, th) - c));
                }
        }
    });
    ApproximationError e;
    e.N = N;
    for (std::size_t k = 0; k < l1.size(); ++k) {
        e.l1 += l1[k];
        e.linf = std::max(e.linf, linf[k]);
    }
    return e;
}

struct RegularityReport {
    double alpha = 0.0;
    double seminorm_estimate = 0.0;
    std::string method;
    std::string warning;
};

/// Midpoint estimate of the Gagliardo double integral
///   int int |rho(x) - rho(y)| / |x - y|^{2 + alpha} dx dy  over B_1 x B_1
/// on a polar product grid with `grid.radial` x `grid.angular` cells. Pairs of
/// cells with coinciding centres are skipped.
inline RegularityReport w_alpha_1_seminorm(const ScalarDatum& datum, double alpha, PolarGridSpec grid = {64, 128}) {
    if (!(alpha > 0.0)) throw DomainError("seminorm exponent must be positive");
    if (grid.radial < 4 || grid.angular < 4) throw DomainError("seminorm grid too coarse");
    RegularityReport rep;
    rep.alpha = alpha;
    rep.method = "polar midpoint " + std::to_string(grid.radial) + "x" + std::to_string(grid.angular) + ", coincident centres skipped";
    if (alpha >= 1.0) rep.warning = "alpha >= 1: the double integral diverges for nonconstant data; use the L1 norm of the gradient";
    const int nr = grid.radial, nt = grid.angular;
    const std::size_t cells = static_cast<std::size_t>(nr) * static_cast<std::size_t>(nt);
    std::vector<double> v(cells), w(cells);
    const double dr = 1.0 / nr, dt = two_pi / nt;
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nt; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * nt + j;
            const double r = (i + 0.5) * dr, th = (j + 0.5) * dt;
            v[k] = datum.value(r, th);
            w[k] = r * dr * dt;
        }
    // The kernel depends only on the two radii and the angular index offset.
    const double expo = -0.5 * (2.0 + alpha);
    const std::size_t nts = static_cast<std::size_t>(nt);
    std::vector<double> kernel(static_cast<std::size_t>(nr) * nr * nts, 0.0);
    for (int ia = 0; ia < nr; ++ia)
        for (int ib = 0; ib < nr; ++ib)
            for (int dj = 0; dj < nt; ++dj) {
                const double ra = (ia + 0.5) * dr, rb = (ib + 0.5) * dr;
                const double d2 = ra * ra + rb * rb - 2.0 * ra * rb * std::cos(dj * dt);
                const std::size_t k = (static_cast<std::size_t>(ia) * nr + ib) * nts + dj;
                kernel[k] = (ia == ib && dj == 0) || !(d2 > 0.0) ? 0.0 : std::pow(d2, expo);
            }
    std::vector<double> partial(cells, 0.0);
    parallel_for(cells, [&](std::size_t a) {
        const std::size_t ia = a / nts, ja = a % nts;
        double acc = 0.0;
        for (std::size_t b = 0; b < cells; ++b) {
            const std::size_t ib = b / nts, jb = b % nts;
            const std::size_t dj = ja >= jb ? ja - jb : ja + nts - jb;
            acc += w[b] * std::abs(v[a] - v[b]) * kernel[(ia * static_cast<std::size_t>(nr) + ib) * nts + dj];
        }
        partial[a] = acc * w[a];
    });
    for (double p : partial) rep.seminorm_estimate += p;
    return rep;
}

} // namespace diskmix
