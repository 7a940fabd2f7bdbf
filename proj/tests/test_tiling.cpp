#include "diskmix/tiling.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace diskmix;

TEST(Tiling, CountsAndAreasPartitionTheDisk) {
    for (int M = 1; M <= 7; ++M) {
        const auto tiles = build_tiling(M);
        ASSERT_EQ(tiles.size(), tile_count(M));
        double area = 0.0;
        for (std::size_t k = 0; k < tiles.size(); ++k) {
            area += tiles[k].area();
            EXPECT_EQ(tile_index(tiles[k].i, tiles[k].j), k);
        }
        EXPECT_NEAR(area, pi, 1e-12);
    }
    EXPECT_THROW(build_tiling(0), DomainError);
}

TEST(Tiling, TileAreasGrowLikeTheRing) {
    // Ring i has i+1 tiles of area pi (2i+1) h^2 / (i+1), between pi h^2 and 2 pi h^2.
    const int M = 5;
    const double h = std::ldexp(1.0, -M);
    for (const auto& q : build_tiling(M)) {
        EXPECT_GE(q.area(), pi * h * h * (1.0 - 1e-12));
        EXPECT_LE(q.area(), 2.0 * pi * h * h);
    }
}

TEST(Tiling, LocateFindsTheContainingTile) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 5000; ++k) {
        const int M = 1 + static_cast<int>(k % 6);
        const PolarPoint p{u(rng), two_pi * u(rng)};
        const auto [i, j] = locate(p, M);
        const auto q = make_tile(M, i, j);
        EXPECT_GT(p.r, q.r_lo - (i == 0 ? 1.0 : 0.0));
        EXPECT_LE(p.r, q.r_hi);
        const double th = p.theta == 0.0 ? two_pi : p.theta;
        EXPECT_GT(th, q.theta_lo - (j == 0 ? 1e-15 : 0.0));
        EXPECT_LE(th, q.theta_hi);
    }
}

TEST(Tiling, LocateBoundaryConventions) {
    EXPECT_EQ(locate({0.5, 1.0}, 1), std::make_pair(0, 0));    // r = 1/2 belongs to (0, 1/2]
    EXPECT_EQ(locate({0.5001, pi}, 1), std::make_pair(1, 0));  // theta = pi closes (0, pi]
    EXPECT_EQ(locate({0.9, 0.0}, 1), std::make_pair(1, 1));    // theta = 0 is 2pi
    EXPECT_EQ(locate({0.0, 0.0}, 3), std::make_pair(0, 0));
    EXPECT_EQ(locate({1.0, 0.1}, 3), std::make_pair(7, 0));
    EXPECT_THROW(locate({1.01, 0.0}, 2), DomainError);
}

TEST(Tiling, DiameterConstantApproachesItsLimit) {
    // Ring i of level M is an annular sector of radial width h = 2^-M and
    // angle 2pi/(i+1); its chord between opposite corners tends to h sqrt(1 + 4 pi^2).
    const double limit = std::sqrt(1.0 + 4.0 * pi * pi);
    const double c = tile_diameter_constant(8);
    EXPECT_LT(c, limit);
    EXPECT_GT(c, limit - 0.02);
    EXPECT_LT(tile_diameter_constant(4), c);
    EXPECT_NEAR(make_tile(3, 1, 0).diameter() * 8.0, 4.0, 1e-12);
    for (const auto& t : build_tiling(6)) EXPECT_LE(std::ldexp(t.diameter(), 6), c + 1e-12);
}

TEST(Tiling, SubtilesSliceRadially) {
    const auto q = make_tile(2, 3, 1);
    const auto parts = subtiles(q, 5);
    ASSERT_EQ(parts.size(), 8U);
    double area = 0.0;
    for (const auto& s : parts) area += s.area();
    EXPECT_NEAR(area, q.area(), 1e-15);
    EXPECT_EQ(parts.back().r_hi, q.r_hi);
    EXPECT_THROW(subtiles(q, 1), DomainError);
}

TEST(TileQuadrature, HalfDiskAtTimeZero) {
    const FieldSnapshot s(half_disk_datum(), FlowTime(0.0));
    for (const auto& q : build_tiling(3)) {
        const double want = q.i == 0 ? 0.0 : (q.theta_hi <= pi + 1e-12 ? 1.0 : (q.theta_lo >= pi - 1e-12 ? -1.0 : NAN));
        if (std::isnan(want)) continue;
        EXPECT_NEAR(tile_average_quadrature(s, q), want, 1e-14);
    }
}

TEST(TileQuadrature, WeightedSmoothIntegrand) {
    // rho = r cos(theta), weight x = r cos(theta): int_{1/2}^1 r^3 dr int_0^{pi/2} cos^2 = (15/64)(pi/4).
    const FieldSnapshot s(modal_datum({{1, radial::linear(), 0.0}}), FlowTime(0.0));
    const double got = sector_integral_quadrature(s, 0.5, 1.0, 0.0, pi / 2, 8, [](double r, double th) { return r * std::cos(th); });
    EXPECT_NEAR(got, 15.0 * pi / 256.0, 1e-13);
}

TEST(TilesCsv, HeaderAndRows) {
    const auto tiles = build_tiling(1);
    std::stringstream ss;
    write_tiles_csv(ss, tiles, {0.1, 0.2, 0.3});
    std::string header;
    std::getline(ss, header);
    EXPECT_EQ(header, "M,i,j,r_lo,r_hi,theta_lo,theta_hi,average");
    int rows = 0;
    for (std::string line; std::getline(ss, line);) ++rows;
    EXPECT_EQ(rows, 3);
    EXPECT_THROW(write_tiles_csv(ss, tiles, {0.1}), DomainError);
}
