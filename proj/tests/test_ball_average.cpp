#include "diskmix/metrics/ball_average.hpp"
#include "diskmix/metrics/geometric_scale.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace diskmix;

namespace {

// Brute-force Cartesian midpoint average, for cross-checks at moderate t.
double brute_average(const FieldSnapshot& snap, double cx, double cy, double eps, int n) {
    double acc = 0.0, area = 0.0;
    const double h = 2.0 * eps / n;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double x = cx - eps + (a + 0.5) * h, y = cy - eps + (b + 0.5) * h;
            if (std::hypot(x - cx, y - cy) > eps) continue;
            area += h * h;
            acc += h * h * snap.value_cartesian(x, y);
        }
    return acc / area;
}

} // namespace

// Frozen against the independent shear-ray oracle in the oracle tests.
TEST(BallAverage, FrozenHalfDiskValues) {
    const FieldSnapshot snap(half_disk_datum(), FlowTime(5.0));
    EXPECT_NEAR(ball_average(snap, 0.3, 0.2, 0.1), 0.2239879133, 1e-9);
    EXPECT_NEAR(ball_average(snap, 0.95, 0.1, 0.2), 0.1097037899, 1e-9);
    EXPECT_NEAR(ball_average(snap, 0.0, 0.05, 0.1), -0.4799932034, 1e-9);
}

TEST(BallAverage, AgreesWithBruteForce) {
    const FieldSnapshot snap(half_disk_datum(), FlowTime(2.0));
    for (const auto& [x, y, e] : std::vector<std::array<double, 3>>{{0.2, 0.1, 0.3}, {-0.5, 0.6, 0.25}, {0.9, -0.3, 0.4}})
        EXPECT_NEAR(ball_average(snap, x, y, e), brute_average(snap, x, y, e, 1200), 5e-3);
}

TEST(BallAverage, LargeCentredBallSeesTheDiskMean) {
    for (double t : {0.0, 7.0, 100.0}) {
        const FieldSnapshot snap(half_disk_datum(), FlowTime(t));
        EXPECT_NEAR(ball_average(snap, 0.0, 0.0, 2.0), 0.0, 1e-12);
    }
}

TEST(BallAverage, BallOutsideTheDiskIsZero) {
    const FieldSnapshot snap(half_disk_datum(), FlowTime(3.0));
    EXPECT_EQ(ball_average(snap, 1.5, 0.0, 0.4), 0.0);
    EXPECT_EQ(ball_average(snap, 0.0, -2.0, 0.9), 0.0);
}

TEST(BallAverage, InteriorBallOfTheUnmixedHalfDisk) {
    const FieldSnapshot snap(half_disk_datum(), FlowTime(0.0));
    EXPECT_NEAR(ball_average(snap, 0.0, 0.5, 0.3), 1.0, 1e-10);
    EXPECT_NEAR(ball_average(snap, 0.2, -0.5, 0.4), -1.0, 1e-10);
}

TEST(BallAverage, RadialDatumIsStationary) {
    const FieldSnapshot a(stationary_annulus_datum(), FlowTime(0.0));
    const FieldSnapshot b(stationary_annulus_datum(), FlowTime(40.0));
    EXPECT_NEAR(ball_average(a, 0.4, 0.3, 0.35), ball_average(b, 0.4, 0.3, 0.35), 1e-10);
}

TEST(BallAverage, RasterFieldMatchesExact) {
    const FieldSnapshot snap(half_disk_datum(), FlowTime(1.0));
    const double eps = 0.3;
    const CartesianField f = ball_average_field(snap, eps, {256, 2});
    double worst = 0.0;
    for (int iy = 40; iy < 256; iy += 37)
        for (int ix = 40; ix < 256; ix += 41) {
            const double x = f.coordinate(ix), y = f.coordinate(iy);
            if (std::hypot(x, y) > 1.2) continue;
            worst = std::max(worst, std::abs(f.at(ix, iy) - ball_average(snap, x, y, eps)));
        }
    EXPECT_LT(worst, 2e-2);
}

TEST(EpsilonGrid, GeometricFromTwo) {
    const auto g = epsilon_grid(2.0, 0.25, 2);
    ASSERT_EQ(g.size(), 7u);
    EXPECT_DOUBLE_EQ(g.front(), 2.0);
    EXPECT_NEAR(g[1], std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(g.back(), 0.25, 1e-15);
    const auto h = epsilon_grid(0.25, 0.2, 4);
    EXPECT_NEAR(h.front(), 0.25, 1e-15);
}

TEST(GeometricScale, HalfDiskAtTimeEight) {
    const FieldSnapshot snap(half_disk_datum(), FlowTime(8.0));
    GeometricScaleOptions opt;
    opt.eps_max = 0.5;
    opt.eps_min = 1.0 / 64.0;
    const auto res = geometric_scale(snap, 0.2, opt);
    EXPECT_NEAR(res.epsilon_upper, std::sqrt(2.0) / 8.0, 1e-12);
    EXPECT_NEAR(res.epsilon_lower, std::sqrt(2.0) / 8.0 * std::exp2(-0.25), 1e-12);
    EXPECT_FALSE(res.unmixed());
}

TEST(GeometricScale, UnmixedAtTimeZero) {
    GeometricScaleOptions opt;
    opt.eps_max = 0.5;
    opt.eps_min = 0.25;
    const auto res = geometric_scale(FieldSnapshot(half_disk_datum(), FlowTime(0.0)), 0.2, opt);
    EXPECT_TRUE(res.unmixed());
    for (const auto& e : res.tests) EXPECT_FALSE(e.passes);
}

TEST(GeometricScale, MonotoneInKappa) {
    const FieldSnapshot snap(half_disk_datum(), FlowTime(6.0));
    GeometricScaleOptions opt;
    opt.eps_max = 1.0;
    opt.eps_min = 1.0 / 32.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double k : {0.1, 0.2, 0.4, 0.8}) {
        const double up = geometric_scale(snap, k, opt).epsilon_upper;
        EXPECT_LE(up, prev);
        prev = up;
    }
}

TEST(GeometricScale, RasterMethodBracketsTheExactScale) {
    const FieldSnapshot snap(half_disk_datum(), FlowTime(4.0));
    GeometricScaleOptions exact;
    exact.eps_max = 1.0;
    exact.eps_min = 1.0 / 16.0;
    GeometricScaleOptions raster = exact;
    raster.method = BallMethod::Raster;
    raster.raster = {512, 2};
    const double a = geometric_scale(snap, 0.3, exact).epsilon_upper;
    const double b = geometric_scale(snap, 0.3, raster).epsilon_upper;
    EXPECT_LE(std::abs(std::log2(a / b)), 0.51);
}
