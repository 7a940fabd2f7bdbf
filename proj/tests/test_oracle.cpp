#include "diskmix/harness/config.hpp"
#include "diskmix/oracle.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace diskmix;

namespace {

// Independent reference: along a ray the pulled-back profile is constant
// between the radii where theta - 2 pi t r crosses a breakpoint, so
// int f(theta - 2 pi t r) r dr is a finite sum of v (r_b^2 - r_a^2) / 2.
double ray_integral(const StepProfile& f, double theta, double t, double r_lo, double r_hi) {
    std::vector<double> rs{r_lo, r_hi};
    if (t > 0.0) {
        const double w = two_pi * t;
        for (double b : f.breakpoints()) {
            // theta - w r = b + 2 pi n
            const double n_lo = std::floor((theta - w * r_hi - b) / two_pi) - 1;
            const double n_hi = std::ceil((theta - w * r_lo - b) / two_pi) + 1;
            for (double n = n_lo; n <= n_hi; ++n) {
                const double r = (theta - b - two_pi * n) / w;
                if (r > r_lo && r < r_hi) rs.push_back(r);
            }
        }
    }
    std::sort(rs.begin(), rs.end());
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < rs.size(); ++k) {
        const double mid = 0.5 * (rs[k] + rs[k + 1]);
        acc += f(theta - two_pi * t * mid) * 0.5 * (rs[k + 1] * rs[k + 1] - rs[k] * rs[k]);
    }
    return acc;
}

// Composite Simpson in theta over the ray integrals, which are piecewise
// smooth in theta for t > 0 and piecewise constant at t = 0; the range is split
// at the profile jumps so each Simpson panel sees a smooth integrand at t = 0.
double reference_sector(const StepProfile& f, double r_lo, double r_hi, double th_lo, double th_hi, double t, int panels = 20000) {
    std::vector<double> cuts{th_lo, th_hi};
    if (t == 0.0) {
        for (double b : f.breakpoints())
            for (double n = std::floor((th_lo - b) / two_pi); b + two_pi * n < th_hi; ++n)
                if (b + two_pi * n > th_lo) cuts.push_back(b + two_pi * n);
    }
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double a = cuts[p], b = cuts[p + 1];
        const double h = (b - a) / panels;
        double acc = ray_integral(f, a + 1e-13, t, r_lo, r_hi) + ray_integral(f, b - 1e-13, t, r_lo, r_hi);
        for (int k = 1; k < panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * ray_integral(f, a + k * h, t, r_lo, r_hi);
        total += acc * h / 3.0;
    }
    return total;
}

} // namespace

TEST(ProfileCalculus, HalfDiskFrozenValues) {
    const ProfileCalculus c(StepProfile::halves(1.0, -1.0));
    EXPECT_NEAR(c.F_int(), pi * pi, 1e-13);
    EXPECT_NEAR(c.F(pi), pi, 1e-15);
    EXPECT_NEAR(c.F(two_pi), 0.0, 1e-15);
    // I1 at theta = 0, t = 1 over (1/2, 1]: frozen from the closed form.
    EXPECT_NEAR(boundary_term_I1(c, 0.0, FlowTime(1.0), 0.5, 1.0), 14.804406601634, 1e-10);
    // [a, b] = [-2pi, -pi] holds one multiple of 2pi at its left end and no full period.
    EXPECT_EQ(bulk_term_I2(c, 0.0, FlowTime(1.0), 0.5, 1.0), 0.0);
}

TEST(ProfileCalculus, RejectsProfilesWithMean) {
    EXPECT_THROW(ProfileCalculus(StepProfile::constant(1.0)), DomainError);
}

TEST(ProfileCalculus, I1PlusI2MatchesRayReference) {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 300; ++k) {
        const StepProfile f = random_mean_free_profile(rng);
        const ProfileCalculus c(f);
        const double theta = two_pi * unit_draw(rng) - pi;
        const double t = 0.1 + 60.0 * unit_draw(rng);
        const double lo = 0.9 * unit_draw(rng), hi = lo + (1.0 - lo) * (0.05 + 0.95 * unit_draw(rng));
        const double w = two_pi * t;
        const double closed = (boundary_term_I1(c, theta, FlowTime(t), lo, hi) + bulk_term_I2(c, theta, FlowTime(t), lo, hi)) / (w * w);
        EXPECT_NEAR(closed, ray_integral(f, theta, t, lo, hi), 1e-12 * (1.0 + t)) << "case " << k;
    }
}

TEST(ExactSector, MatchesIndependentReference) {
    std::mt19937_64 rng(22);
    for (int k = 0; k < 24; ++k) {
        const StepProfile f = random_mean_free_profile(rng);
        const double t = std::array<double, 4>{0.0, 0.5, 5.0, 50.0}[k % 4];
        const double r_lo = 0.8 * unit_draw(rng), r_hi = r_lo + 0.2 * unit_draw(rng) + 0.01;
        const double th_lo = two_pi * unit_draw(rng), th_hi = th_lo + pi * unit_draw(rng) + 0.01;
        const double exact = exact_sector_integral(ProfileCalculus(f), r_lo, r_hi, th_lo, th_hi, FlowTime(t));
        const double ref = reference_sector(f, r_lo, r_hi, th_lo, th_hi, t);
        EXPECT_NEAR(exact, ref, 1e-8) << "case " << k << " t=" << t;
    }
}

TEST(ExactTileAverage, AgreesWithQuadratureOnRandomData) {
    std::mt19937_64 rng(23);
    for (int k = 0; k < 60; ++k) {
        DatumSpec spec;
        spec.kind = "step-radial";
        spec.level = static_cast<int>(rng() % 4);
        const ScalarDatum d = build_datum(spec, rng());
        const int M = 1 + static_cast<int>(rng() % 5);
        const auto tiles = build_tiling(M);
        const auto& q = tiles[rng() % tiles.size()];
        const FlowTime t(std::array<double, 3>{0.5, 5.0, 50.0}[k % 3]);
        EXPECT_NEAR(exact_tile_average(d, q, t), tile_average_quadrature(FieldSnapshot(d, t), q), 1e-10);
    }
}

TEST(ExactTileAverage, NonMeanFreeProfilesSplitOffTheirMean) {
    const auto d = kappa_pathology_datum(0.3);
    const auto tiles = build_tiling(3);
    for (double t : {0.0, 3.0, 40.0})
        for (std::size_t k = 0; k < tiles.size(); k += 3)
            EXPECT_NEAR(exact_tile_average(d, tiles[k], FlowTime(t)), tile_average_quadrature(FieldSnapshot(d, FlowTime(t)), tiles[k]), 1e-12);
}

TEST(ExactTileAverage, AveragesSumToTheIntegral) {
    DatumSpec spec;
    spec.kind = "step-radial";
    spec.level = 2;
    const ScalarDatum d = build_datum(spec, 4);
    const auto tiles = build_tiling(4);
    const auto avg = exact_tile_averages(d, 4, FlowTime(13.0));
    double total = 0.0;
    for (std::size_t k = 0; k < tiles.size(); ++k) total += avg[k] * tiles[k].area();
    EXPECT_NEAR(total, 0.0, 1e-12);
    EXPECT_LE(max_abs(avg), d.sup_norm());
}

TEST(TileBounds, RegimeAndThresholdScales) {
    DatumSpec spec;
    spec.kind = "step-radial";
    spec.level = 2;
    const ScalarDatum d = build_datum(spec, 4);
    const auto rot = tile_average_bound_check(d, 4, FlowTime(64.0), 0.2);
    EXPECT_EQ(rot.regime, TileRegime::Rotation);
    EXPECT_NEAR(rot.kappa_threshold_ratio, 64.0 / (16.0 / 0.2), 1e-15);
    EXPECT_NEAR(rot.fine_threshold_ratio, 64.0 / 256.0, 1e-15);
    const auto sub = tile_average_bound_check(d, 2, FlowTime(64.0), 0.2);
    EXPECT_EQ(sub.regime, TileRegime::SubTiling);
    EXPECT_NEAR(sub.fine_threshold_ratio, 64.0 / 16.0, 1e-15);
    EXPECT_THROW(tile_average_bound_check(half_disk_datum(), 2, FlowTime(1.0), 1.5), DomainError);
    EXPECT_THROW(tile_average_bound_check(stationary_annulus_datum(), 2, FlowTime(1.0), 0.2), DomainError);
}

TEST(TileBounds, CalibrationFindsALastingThreshold) {
    const auto cal = calibrate_tile_threshold(half_disk_datum(), 3, 0.5, TileBound::Kappa, 1.0, 1024.0);
    ASSERT_TRUE(cal.first_time.has_value());
    for (const auto& r : cal.scan)
        if (r.t >= *cal.first_time) EXPECT_TRUE(r.kappa_bound_holds);
    EXPECT_EQ(cal.scan.size(), 11U);
}
