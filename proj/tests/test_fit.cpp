#include "diskmix/metrics/fit.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace diskmix;

namespace {

std::vector<std::pair<double, double>> power_series(double c, double p, int n) {
    std::vector<std::pair<double, double>> s;
    for (int k = 0; k < n; ++k) {
        const double t = std::ldexp(1.0, k);
        s.emplace_back(t, c * std::pow(t, p));
    }
    return s;
}

} // namespace

TEST(DecayFit, ExactPowerLaws) {
    const auto a = fit_decay_rate(power_series(1.0, -1.0, 6));
    EXPECT_NEAR(a.slope, -1.0, 1e-14);
    EXPECT_NEAR(a.intercept, 0.0, 1e-14);
    EXPECT_NEAR(a.residual, 0.0, 1e-14);
    EXPECT_EQ(a.points, 6u);

    const auto b = fit_decay_rate(power_series(7.0, -0.5, 8));
    EXPECT_NEAR(b.slope, -0.5, 1e-14);
    EXPECT_NEAR(b.intercept, std::log(7.0), 1e-13);

    const auto c = fit_decay_rate(power_series(3.0, 0.0, 5));
    EXPECT_NEAR(c.slope, 0.0, 1e-15);
}

TEST(DecayFit, WindowRestrictsPoints) {
    auto s = power_series(1.0, -1.0, 4);
    for (int k = 4; k < 8; ++k) s.emplace_back(std::ldexp(1.0, k), 5.0 * std::pow(std::ldexp(1.0, k), -2.0));
    const auto f = fit_decay_rate(s, {16.0, 128.0});
    EXPECT_EQ(f.points, 4u);
    EXPECT_NEAR(f.slope, -2.0, 1e-13);
    EXPECT_DOUBLE_EQ(f.t_min, 16.0);
    EXPECT_DOUBLE_EQ(f.t_max, 128.0);
}

TEST(DecayFit, ResidualMeasuresScatter) {
    auto s = power_series(1.0, -1.0, 4);
    s[1].second *= std::exp(0.1);
    s[2].second *= std::exp(-0.1);
    const auto f = fit_decay_rate(s);
    EXPECT_GT(f.residual, 0.01);
}

TEST(DecayFit, RejectsInvalidSeries) {
    EXPECT_THROW(fit_decay_rate(power_series(1.0, -1.0, 3)), DomainError);
    auto neg = power_series(1.0, -1.0, 5);
    neg[2].second = 0.0;
    EXPECT_THROW(fit_decay_rate(neg), DomainError);
    auto unordered = power_series(1.0, -1.0, 5);
    std::swap(unordered[1], unordered[3]);
    EXPECT_THROW(fit_decay_rate(unordered), DomainError);
}

TEST(EarliestEntry, FindsWhereTheAsymptoticRegimeStarts) {
    // Flat until t = 16, then t^-1.
    std::vector<std::pair<double, double>> s;
    for (int k = 0; k < 10; ++k) {
        const double t = std::ldexp(1.0, k);
        s.emplace_back(t, t <= 16.0 ? 1.0 : 16.0 / t);
    }
    const auto e = earliest_window_entry(s, {}, -1.1, -0.9);
    ASSERT_TRUE(e.has_value());
    EXPECT_DOUBLE_EQ(*e, 16.0);
    EXPECT_FALSE(earliest_window_entry(s, {}, -3.0, -2.0).has_value());
}
