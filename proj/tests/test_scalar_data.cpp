#include "diskmix/scalar_data.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace diskmix;

TEST(StepProfile, HalfOpenPiecesAndZeroIsTwoPi) {
    const auto f = StepProfile::halves(1.0, -1.0);
    EXPECT_EQ(f(pi), 1.0);       // (0, pi] is the upper piece
    EXPECT_EQ(f(pi + 1e-12), -1.0);
    EXPECT_EQ(f(0.0), -1.0);     // 0 is identified with 2pi
    EXPECT_EQ(f(two_pi), -1.0);
    EXPECT_EQ(f(1e-12), 1.0);
    EXPECT_EQ(f(-0.5), -1.0);
}

TEST(StepProfile, RejectsMalformedBreakpoints) {
    EXPECT_THROW(StepProfile({0.0, 1.0}, {1.0}), DomainError);
    EXPECT_THROW(StepProfile({0.0, 2.0, 1.0, two_pi}, {1.0, 2.0, 3.0}), DomainError);
    EXPECT_THROW(StepProfile({0.0, two_pi}, {1.0, 2.0}), DomainError);
    EXPECT_THROW(StepProfile::equal_steps({}), DomainError);
}

TEST(StepProfile, PrimitivesOfHalves) {
    const auto f = StepProfile::halves(1.0, -1.0);
    EXPECT_NEAR(f.antiderivative(pi), pi, 1e-15);
    EXPECT_NEAR(f.antiderivative(two_pi), 0.0, 1e-15);
    // int_0^{2pi} f(z) z dz = pi^2/2 - 3 pi^2/2
    EXPECT_NEAR(f.moment_antiderivative(two_pi), -pi * pi, 1e-13);
    EXPECT_NEAR(f.integral_over(-pi, pi), 0.0, 1e-14);
    EXPECT_NEAR(f.integral_over(0.5, 0.5 + 3.0 * two_pi), 0.0, 1e-13);
    EXPECT_NEAR(f.integral_over(-0.5, 0.5), 0.0, 1e-15);
    EXPECT_NEAR(f.integral_over(0.0, 1.0), 1.0, 1e-15);
}

TEST(StepProfile, IntegralOverIsAdditiveAndPeriodic) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    const StepProfile f({0.0, 0.7, 2.0, 4.5, two_pi}, {0.3, -1.2, 2.0, 0.1});
    for (int k = 0; k < 500; ++k) {
        const double a = u(rng), b = u(rng), c = u(rng);
        EXPECT_NEAR(f.integral_over(a, b) + f.integral_over(b, c), f.integral_over(a, c), 1e-12);
        EXPECT_NEAR(f.integral_over(a + two_pi, b + two_pi), f.integral_over(a, b), 1e-12);
    }
}

TEST(StepProfile, FourierCoefficientOfHalves) {
    const auto c = StepProfile::halves(1.0, -1.0).fourier_coefficient(1);
    EXPECT_NEAR(c.real(), 0.0, 1e-15);
    EXPECT_NEAR(c.imag(), -2.0 / pi, 1e-15);
    EXPECT_NEAR(std::abs(StepProfile::halves(1.0, -1.0).fourier_coefficient(2)), 0.0, 1e-15);
}

TEST(StepProfile, MinusMeanIsMeanFree) {
    const StepProfile f({0.0, 1.0, two_pi}, {3.0, 1.0});
    EXPECT_NEAR(f.minus_mean().mean(), 0.0, 1e-15);
    EXPECT_NEAR(f.minus_mean().sup_abs(), 3.0 - f.mean(), 1e-15);
}

TEST(Datum, HalfDiskValuesAndOutsideDisk) {
    const auto d = half_disk_datum();
    EXPECT_EQ(d.value(0.5, 1.0), 1.0);
    EXPECT_EQ(d.value(0.5, -1.0), -1.0);
    EXPECT_EQ(d.value(1.2, 1.0), 0.0);
    EXPECT_EQ(d.sup_norm(), 1.0);
    EXPECT_TRUE(d.zero_circular_mean());
    EXPECT_EQ(d.angular_bandwidth(), 1);
}

TEST(Datum, StepRadialRejectsNonMeanFreeProfiles) {
    EXPECT_THROW(make_step_radial(0, {StepProfile::constant(1.0)}), DomainError);
    EXPECT_THROW(make_step_radial(1, {StepProfile::halves(1, -1)}), DomainError);
}

TEST(Datum, AnnulusIndexUsesHalfOpenAnnuli) {
    const auto d = make_step_radial(2, {StepProfile::halves(1, -1), StepProfile::halves(2, -2), StepProfile::halves(3, -3),
                                        StepProfile::halves(4, -4)});
    EXPECT_EQ(d.annulus_index(0.0), 0U);
    EXPECT_EQ(d.annulus_index(0.25), 0U);
    EXPECT_EQ(d.annulus_index(0.25 + 1e-12), 1U);
    EXPECT_EQ(d.annulus_index(1.0), 3U);
    EXPECT_EQ(d.value(0.75, 1.0), 3.0);
}

TEST(Datum, StationaryAnnulusCircularMeans) {
    const auto d = stationary_annulus_datum();
    EXPECT_NEAR(circular_integral(d, 0.5), -two_pi * 0.5, 1e-14);
    EXPECT_NEAR(circular_integral(d, 0.9), two_pi * 0.9, 1e-14);
    EXPECT_FALSE(check_zero_circular_mean(d).holds);
    EXPECT_FALSE(d.zero_circular_mean());
    // Global mean: pi r0^2 (-1) + pi (1 - r0^2) = 0.
    const double r0 = stationary_annulus_radius;
    EXPECT_NEAR(-pi * r0 * r0 + pi * (1.0 - r0 * r0), 0.0, 1e-15);
}

TEST(Datum, PathologyMeans) {
    const double k = 0.3;
    const auto d = kappa_pathology_datum(k);
    EXPECT_NEAR(circular_integral(d, 0.8), 0.0, 1e-14);
    EXPECT_NEAR(circular_integral(d, 0.2), two_pi * 0.2 * k, 1e-14);
    const double r1 = pathology_inner_radius, r2 = pathology_outer_radius;
    EXPECT_NEAR(k * pi * r1 * r1 - k * pi * (r2 * r2 - r1 * r1), 0.0, 1e-15);
    EXPECT_EQ(d.value(0.4, 2.0), -k);
    EXPECT_THROW(kappa_pathology_datum(1.0), DomainError);
}

TEST(Datum, ModalRejectsZeroModeAndHasZeroCircularMean) {
    EXPECT_THROW(modal_datum({{0, radial::linear(), 0.0}}), DomainError);
    const auto d = modal_datum({{3, radial::cubic_bump(), 0.4}, {1, radial::linear(), 0.0}});
    EXPECT_TRUE(check_zero_circular_mean(d).holds);
    EXPECT_EQ(d.angular_bandwidth(), 3);
    EXPECT_NEAR(d.value(0.5, 0.0), 0.5 + radial::cubic_bump()(0.5) * std::cos(0.4), 1e-15);
    EXPECT_EQ(modal_datum({}).sup_norm(), 0.0);
}

TEST(Datum, HolderProfileShape) {
    const auto g = radial::holder(0.5);
    EXPECT_EQ(g(0.5), 0.0);
    EXPECT_NEAR(g(1.0), 1.0, 1e-15);
    EXPECT_NEAR(g(0.25), 0.25 * std::sqrt(0.5), 1e-15);
}

TEST(Datum, AngularIntegralMatchesProfile) {
    const auto d = half_disk_datum();
    EXPECT_NEAR(d.angular_integral(0.3, 0.0, pi), pi, 1e-14);
    EXPECT_NEAR(d.angular_integral(0.3, -pi / 2, pi / 2), 0.0, 1e-14);
}

TEST(Sampled, CsvRoundTripAndNodeValues) {
    const auto d = modal_datum({{2, radial::linear(), 0.0}});
    const auto s = sample_on_grid(d, {17, 32});
    std::stringstream ss;
    write_samples_csv(ss, s);
    const auto back = read_samples_csv(ss);
    ASSERT_EQ(back.radii.size(), 17U);
    ASSERT_EQ(back.angles.size(), 32U);
    const auto sd = sampled_datum(back);
    for (std::size_t i = 0; i < back.radii.size(); i += 4)
        for (std::size_t j = 0; j < back.angles.size(); j += 5)
            EXPECT_NEAR(sd.value(back.radii[i], back.angles[j]), d.value(back.radii[i], back.angles[j]), 1e-14);
}

TEST(Sampled, RejectsMalformedCsv) {
    std::stringstream bad_header("x,y,z\n0,0,0\n");
    EXPECT_THROW(read_samples_csv(bad_header), Error);
    std::stringstream ragged("r,theta,value\n0,0,1\n0,1,1\n0.5,0,1\n");
    EXPECT_THROW(read_samples_csv(ragged), Error);
    std::stringstream garbage("r,theta,value\n0;0;1\n");
    EXPECT_THROW(read_samples_csv(garbage), Error);
}

TEST(Sampled, ProjectionRemovesCircularMeans) {
    PolarSamples s;
    for (int i = 0; i < 9; ++i) s.radii.push_back(i / 8.0);
    for (int j = 0; j < 16; ++j) s.angles.push_back(two_pi * j / 16);
    for (double r : s.radii)
        for (double th : s.angles) s.values.push_back(1.0 + r + std::sin(th));
    const auto raw = sampled_datum(s);
    EXPECT_FALSE(check_zero_circular_mean(raw).holds);
    const auto p = project_zero_circular_mean(raw);
    EXPECT_TRUE(check_zero_circular_mean(p).holds);
}
