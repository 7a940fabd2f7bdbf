#pragma once

#include "diskmix/approximation.hpp"
#include "diskmix/flow.hpp"
#include "diskmix/harness/config.hpp"
#include "diskmix/harness/experiment.hpp"
#include "diskmix/metrics/ball_average.hpp"
#include "diskmix/metrics/fit.hpp"
#include "diskmix/metrics/h_minus_one.hpp"
#include "diskmix/oracle.hpp"
#include "diskmix/tiling.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace diskmix {

namespace detail {

inline CheckEntry make_check(std::string name, bool ok, double measured, double limit) {
    return {std::move(name), ok, "measured " + format_number(measured) + ", limit " + format_number(limit)};
}

/// Random step datum of level 0..2 with random mean-free profiles.
inline ScalarDatum random_step_datum(std::mt19937_64& rng) {
    DatumSpec spec;
    spec.kind = "step-radial";
    spec.level = static_cast<int>(rng() % 3);
    return build_datum(spec, rng());
}

inline double max_angle_gap(double a, double b) {
    const double d = std::abs(normalize_angle(a) - normalize_angle(b));
    return std::min(d, two_pi - d);
}

} // namespace detail

/// Fast invariant suite (a few seconds); every entry is independent.
inline std::vector<CheckEntry> run_invariant_suite() {
    std::vector<CheckEntry> out;
    std::mt19937_64 rng(12345);
    const auto draw = [&] { return unit_draw(rng); };

    {
        const ScalarDatum d = detail::random_step_datum(rng);
        double err = 0.0;
        for (int k = 0; k < 2000; ++k) {
            const PolarPoint p{draw(), two_pi * draw()};
            const FlowTime t(100.0 * draw());
            err = std::max(err, std::abs(evaluate_solution(d, t, p) - d.value(p.r, p.theta - shear_angle(p.r, t))));
        }
        out.push_back(detail::make_check("advection_is_pullback_lookup", err <= 1e-12, err, 1e-12));
    }
    {
        double err = 0.0;
        for (int k = 0; k < 2000; ++k) {
            const PolarPoint p{draw(), two_pi * draw()};
            const FlowTime t(50.0 * draw());
            const PolarPoint q = forward_point(pullback_point(p, t), t);
            err = std::max(err, std::abs(q.r - p.r) + detail::max_angle_gap(q.theta, p.theta));
        }
        out.push_back(detail::make_check("forward_inverts_pullback", err <= 1e-9, err, 1e-9));
    }
    {
        double err = 0.0;
        bool located = true;
        for (int M = 1; M <= 6; ++M) {
            double area = 0.0;
            for (const auto& q : build_tiling(M)) {
                area += q.area();
                const auto [r, th] = q.centroid();
                const auto [i, j] = locate({r, th}, M);
                located = located && i == q.i && j == q.j;
            }
            err = std::max(err, std::abs(area - pi));
        }
        out.push_back({"tiles_partition_disk", located && err <= 1e-12, "area error " + format_number(err) + (located ? "" : ", locate mismatch")});
    }
    {
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
            const ScalarDatum d = detail::random_step_datum(rng);
            const int M = 1 + static_cast<int>(rng() % 4);
            const auto tiles = build_tiling(M);
            const auto& q = tiles[rng() % tiles.size()];
            const FlowTime t(std::array<double, 3>{0.5, 5.0, 50.0}[rng() % 3]);
            const double a = exact_tile_average(d, q, t);
            const double b = tile_average_quadrature(FieldSnapshot(d, t), q);
            worst = std::max(worst, std::abs(a - b) / std::max(d.sup_norm(), 1e-300));
        }
        out.push_back(detail::make_check("exact_tile_average_matches_quadrature", worst <= 1e-8, worst, 1e-8));
    }
    {
        const bool ok = check_zero_circular_mean(half_disk_datum()).holds && !check_zero_circular_mean(stationary_annulus_datum()).holds &&
                        check_zero_circular_mean(modal_datum({{2, radial::cubic_bump(), 0.3}})).holds;
        out.push_back({"circular_mean_classification", ok, "half-disk and modal hold, annulus fails"});
    }
    {
        const StepProfile f = random_mean_free_profile(rng);
        double err = 0.0;
        for (int k = 0; k < 200; ++k) {
            const double a = -20.0 + 40.0 * draw(), b = a + 30.0 * draw();
            const double shifted = f.integral_over(a + two_pi, b + two_pi);
            err = std::max(err, std::abs(shifted - f.integral_over(a, b)));
        }
        out.push_back(detail::make_check("profile_primitive_is_periodic", err <= 1e-12, err, 1e-12));
    }
    {
        // Neumann eigenfunction J_1(j r) cos(theta) with J_1'(j) = 0.
        const double j = 1.8411837813406595;
        const ScalarDatum d = modal_datum({{1, [j](double r) { return std::cyl_bessel_j(1.0, j * r); }, 0.0}}, "bessel");
        const double l2 = std::sqrt(pi * integrate_gauss([j](double r) { return std::pow(std::cyl_bessel_j(1.0, j * r), 2) * r; }, 0.0, 1.0, 64));
        const double h = h_minus_one_norm(d, FlowTime(0.0)).norm_value;
        const double rel = std::abs(h - l2 / j) / (l2 / j);
        out.push_back(detail::make_check("hminus1_neumann_eigenfunction", rel <= 1e-4, rel, 1e-4));
    }
    {
        const auto s = h_minus_one_norm(half_disk_datum(), FlowTime(16.0));
        out.push_back(detail::make_check("hminus1_duality_gap", s.duality_gap <= 1e-8, s.duality_gap, 1e-8));
    }
    {
        double lowest = 1.0;
        bool ordered = true;
        for (double t : {0.0, 4.0, 16.0}) {
            HMinusOneOptions inh;
            inh.inhomogeneous = true;
            const double hom = h_minus_one_norm(half_disk_datum(), FlowTime(t)).norm_value;
            const double full = h_minus_one_norm(half_disk_datum(), FlowTime(t), inh).norm_value;
            ordered = ordered && full <= hom * (1.0 + 1e-12);
            lowest = std::min(lowest, full / hom);
        }
        out.push_back({"hminus1_norm_sandwich", ordered && lowest >= 0.5, "smallest inhomogeneous/homogeneous ratio " + format_number(lowest)});
    }
    {
        const double a = h_minus_one_norm(stationary_annulus_datum(), FlowTime(0.0)).norm_value;
        const double b = h_minus_one_norm(stationary_annulus_datum(), FlowTime(50.0)).norm_value;
        out.push_back(detail::make_check("hminus1_radial_data_stationary", std::abs(a - b) <= 1e-10, std::abs(a - b), 1e-10));
    }
    {
        std::vector<std::pair<double, double>> series;
        for (double t = 1.0; t <= 64.0; t *= 2.0) series.emplace_back(t, 7.0 / std::sqrt(t));
        const DecayFit f = fit_decay_rate(series);
        const double err = std::abs(f.slope + 0.5) + std::abs(f.intercept - std::log(7.0));
        out.push_back(detail::make_check("fit_recovers_power_law", err <= 1e-12, err, 1e-12));
    }
    {
        const ScalarDatum d = detail::random_step_datum(rng);
        const ScalarDatum a = radial_approximation(d, 3);
        const ScalarDatum b = radial_approximation(a, 3);
        double err = 0.0;
        for (int k = 0; k < 500; ++k) {
            const double r = draw(), th = two_pi * draw();
            err = std::max(err, std::abs(a.value(r, th) - b.value(r, th)));
        }
        out.push_back(detail::make_check("tile_averaging_is_idempotent", err <= 1e-12, err, 1e-12));
    }
    {
        const FieldSnapshot snap(half_disk_datum(), FlowTime(0.0));
        double worst = 0.0;
        for (double x : {-0.9, -0.3, 0.0, 0.4, 0.95})
            for (double eps : {0.05, 0.3, 1.0}) worst = std::max(worst, std::abs(ball_average(snap, x, 0.0, eps)));
        out.push_back(detail::make_check("ball_average_vanishes_on_symmetry_axis", worst <= 1e-12, worst, 1e-12));
    }
    return out;
}

} // namespace diskmix
