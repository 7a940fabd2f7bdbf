#include "diskmix/flow.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace diskmix;

TEST(Flow, VelocityIsTangentialWithSpeed2PiRSquared) {
    for (double r : {0.1, 0.5, 1.0})
        for (double th : {0.0, 1.0, 4.0}) {
            const auto u = velocity({r, th});
            EXPECT_NEAR(u.norm(), two_pi * r * r, 1e-14);
            EXPECT_NEAR(u.x * std::cos(th) + u.y * std::sin(th), 0.0, 1e-14);
        }
}

TEST(Flow, PullbackThenForwardIsIdentity) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const PolarPoint p{u(rng), two_pi * u(rng)};
        const FlowTime t(200.0 * u(rng));
        const auto q = forward_point(pullback_point(p, t), t);
        EXPECT_NEAR(q.r, p.r, 0.0);
        const double d = std::abs(q.theta - p.theta);
        EXPECT_LT(std::min(d, two_pi - d), 1e-10);
    }
}

TEST(Flow, GroupPropertyOfPullback) {
    const PolarPoint p{0.37, 1.3};
    const auto a = pullback_point(pullback_point(p, FlowTime(3.0)), FlowTime(4.5));
    const auto b = pullback_point(p, FlowTime(7.5));
    EXPECT_NEAR(a.theta, b.theta, 1e-12);
}

TEST(Flow, SolutionAtZeroTimeIsDatum) {
    const auto d = half_disk_datum();
    EXPECT_EQ(evaluate_solution(d, FlowTime(0.0), {0.5, 1.0}), 1.0);
    EXPECT_EQ(evaluate_solution(d, FlowTime(5.0), {1.5, 1.0}), 0.0);
}

TEST(Flow, HalfDiskPullbackLookup) {
    // At r = 1/4 and t = 1 the shear is pi/2: the point theta = pi/4 looks up
    // theta = -pi/4, in the lower half.
    EXPECT_EQ(evaluate_solution(half_disk_datum(), FlowTime(1.0), {0.25, pi / 4}), -1.0);
    EXPECT_EQ(evaluate_solution(half_disk_datum(), FlowTime(1.0), {0.25, 3 * pi / 4 + 0.1}), 1.0);
}

TEST(Flow, RadialDataAreStationary) {
    const auto d = stationary_annulus_datum();
    for (double t : {0.0, 1.0, 77.7})
        for (double r : {0.2, 0.7, 0.71, 0.99}) EXPECT_EQ(evaluate_solution(d, FlowTime(t), {r, 2.0}), d.value(r, 2.0));
}

TEST(Flow, FlowMapPreservesRadiusAndMatchesForwardPoint) {
    const CartesianVector x = to_cartesian({0.6, 0.4});
    const auto y = flow_map(x, FlowTime(2.3));
    EXPECT_NEAR(y.norm(), 0.6, 1e-15);
    const auto q = forward_point({0.6, 0.4}, FlowTime(2.3));
    const auto z = to_cartesian(q);
    EXPECT_NEAR(y.x, z.x, 1e-13);
    EXPECT_NEAR(y.y, z.y, 1e-13);
}

// The angular shear d(2 pi t r)/dr times r is 2 pi t r, largest at r = 1, and
// dominates the stretching once t is large.
TEST(Flow, LipschitzEstimateGrowsLinearly) {
    const double a = lipschitz_estimate(FlowTime(10.0));
    const double b = lipschitz_estimate(FlowTime(80.0));
    EXPECT_NEAR(std::log(b / a) / std::log(8.0), 1.0, 0.02);
    EXPECT_NEAR(a / (two_pi * 10.0), 1.0, 0.05);
    EXPECT_THROW(lipschitz_estimate(FlowTime(1.0), 0), DomainError);
}

TEST(Flow, SnapshotModesCarryShearPhase) {
    const auto d = modal_datum({{1, radial::linear(), 0.0}});
    const FieldSnapshot s(d, FlowTime(2.0));
    const double r = 0.3;
    const auto c = s.angular_mode(r, 1);
    // r cos(theta - 2 pi t r) has coefficient (r/2) e^{-i 2 pi t r}.
    EXPECT_NEAR(c.real(), 0.5 * r * std::cos(two_pi * 2.0 * r), 1e-12);
    EXPECT_NEAR(c.imag(), -0.5 * r * std::sin(two_pi * 2.0 * r), 1e-12);
    EXPECT_NEAR(s.angular_integral(r, 0.0, two_pi), 0.0, 1e-12);
}
