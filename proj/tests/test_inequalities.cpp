#include "diskmix/metrics/inequalities.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace diskmix;

namespace {

TestFunction linear_x() {
    return {[](double x, double) { return x; }, [](double, double) { return CartesianVector{1.0, 0.0}; }};
}

TestFunction gaussian_bump() {
    return {[](double x, double y) { return std::exp(-4.0 * (x * x + y * y)); },
            [](double x, double y) {
                const double e = std::exp(-4.0 * (x * x + y * y));
                return CartesianVector{-8.0 * x * e, -8.0 * y * e};
            }};
}

} // namespace

TEST(Poincare, RatioStaysBelowHalfTheDiameterConstant) {
    for (int M = 1; M <= 5; ++M) {
        EXPECT_LE(poincare_ratio(linear_x(), M).max_ratio, 0.5 * tile_diameter_c) << "M=" << M;
        EXPECT_LE(poincare_ratio(gaussian_bump(), M).max_ratio, 0.5 * tile_diameter_c) << "M=" << M;
    }
}

TEST(Poincare, ConstantFunctionsAreDegenerateEverywhere) {
    const TestFunction c{[](double, double) { return 3.0; }, [](double, double) { return CartesianVector{0.0, 0.0}; }};
    const auto rep = poincare_ratio(c, 2);
    EXPECT_EQ(rep.max_ratio, 0.0);
    EXPECT_EQ(rep.degenerate_tiles, 0u);
}

TEST(TileBound, UnmixedHalfDiskHasNoQualifyingLevel) {
    const auto b = tile_upper_bound_scale(FieldSnapshot(half_disk_datum(), FlowTime(0.0)), 0.5, 1, 5);
    EXPECT_FALSE(b.level.has_value());
    EXPECT_TRUE(std::isinf(b.epsilon_bound));
}

TEST(TileBound, MixedHalfDiskQualifies) {
    const auto b = tile_upper_bound_scale(FieldSnapshot(half_disk_datum(), FlowTime(2000.0)), 0.5, 1, 4);
    ASSERT_TRUE(b.level.has_value());
    EXPECT_DOUBLE_EQ(b.epsilon_bound, 8.0 * tile_diameter_c * std::ldexp(1.0, -*b.level) / 0.5);
    EXPECT_THROW(tile_upper_bound_scale(FieldSnapshot(half_disk_datum(), FlowTime(1.0)), 1.0, 1, 2), DomainError);
}

TEST(Mpc2, HypothesisAndConstantOnAMixedState) {
    const auto rep = mpc2_bound_check(FieldSnapshot(half_disk_datum(), FlowTime(500.0)), 3);
    EXPECT_TRUE(rep.hypothesis_holds);
    EXPECT_DOUBLE_EQ(rep.hypothesis_limit, 0.25);
    EXPECT_NEAR(rep.empirical_constant, rep.h_minus_one / 0.125, 1e-15);
    EXPECT_LT(rep.empirical_constant, std::sqrt(pi) * (2.0 + 2.0 / 1.8411837813406595));
}

TEST(Mpc2, UnmixedStateFailsTheHypothesis) {
    EXPECT_FALSE(mpc2_bound_check(FieldSnapshot(half_disk_datum(), FlowTime(0.0)), 2).hypothesis_holds);
}

TEST(WeakPairing, ConstantTestFunctionSeesTheZeroMean) {
    for (double t : {0.0, 3.0, 40.0})
        EXPECT_NEAR(weak_pairing(FieldSnapshot(half_disk_datum(), FlowTime(t)), [](double, double) { return 1.0; }), 0.0, 1e-12);
}

TEST(WeakPairing, AnnulusAgainstACentredBump) {
    const double r0sq = 0.5;
    const auto bump = [r0sq](double x, double y) {
        const double q = (x * x + y * y) / r0sq;
        return q < 1.0 ? (1.0 - q) * (1.0 - q) : 0.0;
    };
    for (double t : {0.0, 50.0, 256.0})
        EXPECT_NEAR(weak_pairing(FieldSnapshot(stationary_annulus_datum(), FlowTime(t)), bump, 6, 8), -pi / 6.0, 1e-10);
}

TEST(WeakPairing, HalfDiskAgainstHeightDecays) {
    const auto y = [](double, double v) { return v; };
    EXPECT_NEAR(weak_pairing(FieldSnapshot(half_disk_datum(), FlowTime(0.0)), y, 5), 4.0 / 3.0, 1e-10);
    const double late = std::abs(weak_pairing(FieldSnapshot(half_disk_datum(), FlowTime(100.0)), y, 5));
    EXPECT_LT(late, 0.05);
}
