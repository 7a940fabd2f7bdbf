#include "diskmix/metrics/h_minus_one.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace diskmix;

namespace {

// Half-disk at t = 0: the m-th mode load is supported on odd m with Fourier
// coefficient -2i/(pi m); solving the radial Neumann problem for r^0 loads in
// closed form gives ||rho||^2 = (4/pi) sum_{odd m <= M} (m + 4) / (m^3 (m + 2)^2).
double half_disk_series(int modes) {
    double s = 0.0;
    for (int m = 1; m <= modes; m += 2) s += (m + 4.0) / (std::pow(m, 3) * std::pow(m + 2.0, 2));
    return std::sqrt(4.0 / pi * s);
}

// Annulus +1 on r < r0, -1 outside with r0^2 = 1/2: radial Neumann solve in closed form.
double annulus_closed_form() {
    const double r0 = 1.0 / std::sqrt(2.0);
    const double r2 = r0 * r0, r4 = r2 * r2;
    return std::sqrt(two_pi * (r4 / 16.0 + 0.25 * ((1.0 - r4) / 4.0 - (1.0 - r2) - std::log(r0))));
}

} // namespace

TEST(HMinusOne, HalfDiskMatchesModeSeries) {
    HMinusOneOptions opt;
    const auto s = h_minus_one_norm(half_disk_datum(), FlowTime(0.0), opt);
    EXPECT_NEAR(s.norm_value / half_disk_series(opt.mode_count), 1.0, 1e-5);
    EXPECT_NEAR(half_disk_series(opt.mode_count) / half_disk_series(1 << 20), 1.0, 1e-6);
    EXPECT_TRUE(s.zero_mode_vanished);
    EXPECT_LT(s.residual, 1e-10);
}

TEST(HMinusOne, AnnulusMatchesClosedForm) {
    const auto s = h_minus_one_norm(stationary_annulus_datum(), FlowTime(0.0));
    EXPECT_NEAR(s.norm_value / annulus_closed_form(), 1.0, 1e-4);
    EXPECT_FALSE(s.zero_mode_vanished);
}

TEST(HMinusOne, RadialDataAreStationary) {
    const double a = h_minus_one_norm(stationary_annulus_datum(), FlowTime(0.0)).norm_value;
    for (double t : {1.0, 17.5, 300.0}) EXPECT_NEAR(h_minus_one_norm(stationary_annulus_datum(), FlowTime(t)).norm_value, a, 1e-12);
}

// Frozen from this implementation at default resolution.
TEST(HMinusOne, HalfDiskFrozenValues) {
    EXPECT_NEAR(h_minus_one_norm(half_disk_datum(), FlowTime(16.0)).norm_value, 0.0276037718423, 1e-9);
    EXPECT_NEAR(h_minus_one_norm(half_disk_datum(), FlowTime(64.0)).norm_value, 0.00690053085628, 1e-10);
}

TEST(HMinusOne, DecreasesUnderMixing) {
    double prev = h_minus_one_norm(half_disk_datum(), FlowTime(0.0)).norm_value;
    for (double t : {4.0, 16.0, 64.0, 256.0}) {
        const double h = h_minus_one_norm(half_disk_datum(), FlowTime(t)).norm_value;
        EXPECT_LT(h, prev) << "t=" << t;
        prev = h;
    }
}

TEST(HMinusOne, DualityGapVanishes) {
    for (double t : {0.0, 3.0, 40.0}) {
        const auto s = h_minus_one_norm(half_disk_datum(), FlowTime(t));
        EXPECT_LT(s.duality_gap, 1e-10);
    }
}

TEST(HMinusOne, NeumannEigenfunctionScalesByEigenvalue) {
    const double j = 1.8411837813406595;
    const auto bessel = [j](double r) { return std::cyl_bessel_j(1.0, j * r); };
    const ScalarDatum d = modal_datum({{1, bessel, 0.0}}, "bessel");
    const double l2 = std::sqrt(pi * integrate_gauss([&](double r) { return bessel(r) * bessel(r) * r; }, 0.0, 1.0, 64));
    EXPECT_NEAR(h_minus_one_norm(d, FlowTime(0.0)).norm_value, l2 / j, 1e-4 * l2 / j);
}

TEST(HMinusOne, RejectsNonzeroMean) {
    const ScalarDatum one = radial_datum([](double) { return 1.0; }, {}, "one");
    EXPECT_THROW(h_minus_one_norm(one, FlowTime(0.0)), DomainError);
    HMinusOneOptions inh;
    inh.inhomogeneous = true;
    EXPECT_NO_THROW(h_minus_one_norm(one, FlowTime(0.0), inh));
}

TEST(HMinusOne, RejectsCoarseGrids) {
    HMinusOneOptions opt;
    opt.radial_resolution = 32;
    EXPECT_THROW(h_minus_one_norm(half_disk_datum(), FlowTime(0.0), opt), DomainError);
    opt = {};
    opt.mode_count = 16;
    EXPECT_THROW(h_minus_one_norm(half_disk_datum(), FlowTime(0.0), opt), DomainError);
}

TEST(HMinusOne, InhomogeneousNeverExceedsHomogeneous) {
    HMinusOneOptions inh;
    inh.inhomogeneous = true;
    for (double t : {0.0, 2.0, 20.0}) {
        const double hom = h_minus_one_norm(half_disk_datum(), FlowTime(t)).norm_value;
        const double full = h_minus_one_norm(half_disk_datum(), FlowTime(t), inh).norm_value;
        EXPECT_LE(full, hom * (1.0 + 1e-12));
    }
}

TEST(HMinusOne, ZeroDatumHasZeroNorm) {
    const auto s = h_minus_one_norm(zero_datum(), FlowTime(5.0));
    EXPECT_EQ(s.norm_value, 0.0);
    EXPECT_EQ(s.duality_gap, 0.0);
}

TEST(HMinusOne, ResolutionAdaptsToTime) {
    EXPECT_EQ(h_minus_one_norm(half_disk_datum(), FlowTime(0.0)).radial_resolution, 512);
    EXPECT_GE(h_minus_one_norm(half_disk_datum(), FlowTime(1024.0)).radial_resolution, 4096);
}
