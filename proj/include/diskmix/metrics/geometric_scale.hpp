#pragma once

#include "diskmix/core.hpp"
#include "diskmix/flow.hpp"
#include "diskmix/metrics/ball_average.hpp"

#include <limits>
#include <optional>
#include <tuple>
#include <vector>

namespace diskmix {

enum class BallMethod { Exact, Raster };

struct GeometricScaleOptions {
    double eps_max = 2.0;
    double eps_min = 1.0 / 256.0;
    int steps_per_octave = 4;
    /// Centre lattice spacing as a fraction of eps.
    double center_spacing = 0.25;
    /// Lattice maxima refined by local pattern search.
    int refine_candidates = 32;
    BallQuadrature quadrature;
    BallMethod method = BallMethod::Exact;
    RasterSpec raster;
    /// A ball passes when |average| <= kappa ||rho|| (1 + relative_slack).
    double relative_slack = 1e-9;
};

/// Descending radii 2 * 2^{-k / steps_per_octave} inside [eps_min, eps_max].
/// Every configuration draws from the same global ladder.
inline std::vector<double> epsilon_grid(double eps_max, double eps_min, int steps_per_octave) {
    if (!(eps_min > 0.0) || !(eps_max >= eps_min) || steps_per_octave < 1) throw DomainError("invalid epsilon grid");
    std::vector<double> out;
    for (int k = 0;; ++k) {
        const double e = 2.0 * std::exp2(-static_cast<double>(k) / steps_per_octave);
        if (e < eps_min * (1.0 - 1e-12)) break;
        if (e <= eps_max * (1.0 + 1e-12)) out.push_back(e);
    }
    if (out.empty()) throw DomainError("epsilon grid is empty");
    return out;
}

struct BallScan {
    double epsilon = 0.0;
    double max_abs_average = 0.0;
    double argmax_x = 0.0;
    double argmax_y = 0.0;
    std::size_t balls_evaluated = 0;
    /// Set when the scan stopped at a level containing a violator.
    bool threshold_exceeded = false;
};

/// Largest |ball average| over centres in the disk of radius 1 + eps.
///
/// Centres on a lattice of spacing center_spacing * eps are visited coarse to
/// fine (strides 16, 8, ..., 1); with a threshold the scan stops after the
/// first level holding a violator. Otherwise the best lattice centres are
/// refined by pattern search. Deterministic for a given thread count and
/// independent of it.
inline BallScan max_ball_average(const FieldSnapshot& snap, double eps, const GeometricScaleOptions& opt = {},
                                 std::optional<double> threshold = std::nullopt) {
    BallScan scan;
    scan.epsilon = eps;
    const double reach = 1.0 + eps;
    auto avg = [&](double x, double y) { return ball_average(snap, x, y, eps, opt.quadrature); };

    if (opt.method == BallMethod::Raster) {
        const CartesianField f = ball_average_field(snap, eps, opt.raster);
        for (int iy = 0; iy < f.n; ++iy)
            for (int ix = 0; ix < f.n; ++ix) {
                const double v = std::abs(f.at(ix, iy));
                if (v > scan.max_abs_average) {
                    scan.max_abs_average = v;
                    scan.argmax_x = f.coordinate(ix);
                    scan.argmax_y = f.coordinate(iy);
                }
            }
        scan.balls_evaluated = f.values.size();
        scan.threshold_exceeded = threshold && scan.max_abs_average > *threshold;
        return scan;
    }

    const double delta = opt.center_spacing * eps;
    const int K = static_cast<int>(std::ceil(reach / delta));
    struct Sample {
        int i, j;
        double value;
    };
    std::vector<Sample> all;
    int stride = 1;
    while (stride * 2 <= std::min(16, K)) stride *= 2;
    for (bool first = true; stride >= 1; stride /= 2, first = false) {
        std::vector<std::pair<int, int>> level;
        const int start = -(K / stride) * stride;
        for (int j = start; j <= K; j += stride)
            for (int i = start; i <= K; i += stride) {
                if (!first && i % (2 * stride) == 0 && j % (2 * stride) == 0) continue;
                if (std::hypot(i * delta, j * delta) >= reach) continue;
                level.emplace_back(i, j);
            }
        std::vector<double> vals(level.size());
        parallel_for(level.size(), [&](std::size_t k) { vals[k] = std::abs(avg(level[k].first * delta, level[k].second * delta)); });
        scan.balls_evaluated += level.size();
        bool exceeded = false;
        for (std::size_t k = 0; k < level.size(); ++k) {
            all.push_back({level[k].first, level[k].second, vals[k]});
            if (threshold && vals[k] > *threshold) exceeded = true;
        }
        if (exceeded) {
            scan.threshold_exceeded = true;
            break;
        }
    }

    auto better = [](const Sample& a, const Sample& b) { return std::tie(b.value, a.j, a.i) < std::tie(a.value, b.j, b.i); };
    std::sort(all.begin(), all.end(), better);
    if (!all.empty()) {
        scan.max_abs_average = all.front().value;
        scan.argmax_x = all.front().i * delta;
        scan.argmax_y = all.front().j * delta;
    }
    if (scan.threshold_exceeded) return scan;

    std::vector<Sample> seeds;
    for (const auto& s : all) {
        if (static_cast<int>(seeds.size()) >= opt.refine_candidates) break;
        bool near = false;
        for (const auto& q : seeds) near = near || (std::abs(q.i - s.i) <= 2 && std::abs(q.j - s.j) <= 2);
        if (!near) seeds.push_back(s);
    }
    struct Refined {
        double value, x, y;
        std::size_t evals;
    };
    std::vector<Refined> refined(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t k) {
        double x = seeds[k].i * delta, y = seeds[k].j * delta, best = seeds[k].value;
        std::size_t evals = 0;
        for (double step = 0.5 * delta; step > delta / 64.0; step *= 0.5) {
            bool moved = true;
            while (moved) {
                moved = false;
                for (int dir = 0; dir < 8; ++dir) {
                    const double ang = dir * pi / 4.0;
                    const double nx = x + step * std::cos(ang), ny = y + step * std::sin(ang);
                    if (std::hypot(nx, ny) >= reach) continue;
                    const double v = std::abs(avg(nx, ny));
                    ++evals;
                    if (v > best) {
                        best = v;
                        x = nx;
                        y = ny;
                        moved = true;
                    }
                }
            }
        }
        refined[k] = {best, x, y, evals};
    });
    for (const auto& r : refined) {
        scan.balls_evaluated += r.evals;
        if (r.value > scan.max_abs_average) {
            scan.max_abs_average = r.value;
            scan.argmax_x = r.x;
            scan.argmax_y = r.y;
        }
    }
    scan.threshold_exceeded = threshold && scan.max_abs_average > *threshold;
    return scan;
}

struct EpsilonTest {
    double epsilon = 0.0;
    bool passes = false;
    double max_abs_average = 0.0;
};

struct GeometricScaleResult {
    double kappa = 0.0;
    /// Largest failing radius below epsilon_upper; 0 when the smallest tested
    /// radius passes.
    double epsilon_lower = 0.0;
    /// Smallest passing radius; +infinity when no tested radius passes.
    double epsilon_upper = std::numeric_limits<double>::infinity();
    double center_spacing = 0.0;
    double center_extent = 0.0;
    std::vector<EpsilonTest> tests;

    [[nodiscard]] bool unmixed() const { return std::isinf(epsilon_upper); }
};

/// Brackets the infimum of radii eps for which every eps-ball average of
/// rho(t, .) is at most kappa ||rho||. Every radius of the grid is tested;
/// the admissible set is not assumed to be an interval.
inline GeometricScaleResult geometric_scale(const FieldSnapshot& snap, double kappa, const GeometricScaleOptions& opt = {}) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw DomainError("accuracy kappa must lie in (0, 1)");
    const auto grid = epsilon_grid(opt.eps_max, opt.eps_min, opt.steps_per_octave);
    GeometricScaleResult res;
    res.kappa = kappa;
    res.center_spacing = opt.center_spacing;
    res.center_extent = 1.0 + grid.front();
    const double threshold = kappa * snap.sup_norm() * (1.0 + opt.relative_slack);
    for (double eps : grid) {
        const BallScan scan = max_ball_average(snap, eps, opt, threshold);
        res.tests.push_back({eps, !scan.threshold_exceeded, scan.max_abs_average});
    }
    for (const auto& t : res.tests)
        if (t.passes) res.epsilon_upper = std::min(res.epsilon_upper, t.epsilon);
    for (const auto& t : res.tests)
        if (!t.passes && t.epsilon < res.epsilon_upper) res.epsilon_lower = std::max(res.epsilon_lower, t.epsilon);
    return res;
}

} // namespace diskmix
