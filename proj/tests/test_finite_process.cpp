#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wallbridge/finite_process.hpp"

using namespace wallbridge;
using BC = BoundaryCondition;

TEST(TransDensity, DualRepresentationsAgree) {
    for (BC bc : {BC::reflect, BC::absorb, BC::circle})
        for (int n : {1, 4, 16})
            for (double t : {0.05, 0.3, 2.0, 9.0, 40.0})
                for (double x : {0.1, 1.0, 2.9})
                    for (double y : {0.0, 0.5, 3.1}) {
                        const double a = trans_density_images(bc, x, y, t, n), b = trans_density_fourier(bc, x, y, t, n);
                        EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a))) << to_string(bc) << " n=" << n << " t=" << t;
                    }
}

TEST(TransDensity, MassAndWalls) {
    auto mass = [](BC bc) { return oracle::simpson([&](double y) { return trans_density(bc, 1.0, y, 0.3, 4); }, 0, pi, 1e-13); };
    EXPECT_NEAR(mass(BC::reflect), 1.0, 1e-8);
    EXPECT_LT(mass(BC::absorb), 1.0);
    EXPECT_GT(mass(BC::absorb), 0.5);
    for (double x : {0.2, 1.0, 2.5}) {
        EXPECT_NEAR(trans_density(BC::absorb, x, 0.0, 0.3, 4), 0.0, 1e-15);
        EXPECT_NEAR(trans_density(BC::absorb, x, pi, 0.3, 4), 0.0, 1e-15);
    }
    EXPECT_NEAR(oracle::simpson([&](double y) { return trans_density(BC::circle, 0.4, y, 0.7, 3); }, -pi, pi, 1e-13), 1.0, 1e-8);
    EXPECT_THROW(trans_density(BC::reflect, -0.1, 1.0, 0.3, 4), DomainError);
    EXPECT_THROW(trans_density(BC::reflect, 0.1, 1.0, 0.0, 4), DomainError);
}

TEST(TransDensity, ChapmanKolmogorov) {
    for (BC bc : {BC::reflect, BC::absorb}) {
        const double x = 0.7, y = 2.2, t1 = 0.4, t2 = 0.9;
        const int n = 3;
        const double lhs = oracle::simpson([&](double z) { return trans_density(bc, x, z, t1, n) * trans_density(bc, z, y, t2, n); }, 0, pi, 1e-13);
        EXPECT_NEAR(lhs, trans_density(bc, x, y, t1 + t2, n), 1e-8);
    }
}

TEST(Kernel, OneParticleBridgeDensity) {
    const double T = 3.0;
    FiniteKernel K(BC::reflect, 1, T);
    for (double t : {0.5, 1.5, 2.7})
        for (double x : {0.0, 0.8, 2.0, pi}) {
            const double bridge = trans_density(BC::reflect, 0, x, t, 1) * trans_density(BC::reflect, x, 0, T - t, 1) / trans_density(BC::reflect, 0, 0, T, 1);
            EXPECT_NEAR(K(t, t, x, x), bridge, 1e-12);
        }
}

TEST(Kernel, EvenOddPartsOfCircle) {
    for (int n : {2, 3}) {
        const double T = 6.0;
        FiniteKernel R(BC::reflect, n, T), A(BC::absorb, n, T), C(BC::circle, 2 * n, 2 * T);
        for (auto [ti, tj] : {std::pair{2.0, 2.5}, {3.5, 1.2}}) {
            double worst = 0.0;
            for (int a = 0; a < 5; ++a)
                for (int b = 0; b < 5; ++b) {
                    const double x = 0.3 + 0.6 * a, y = 0.2 + 0.65 * b;
                    worst = std::max(worst, std::abs(R(ti, tj, x, y) - C(2 * ti, 2 * tj, x, y) - C(2 * ti, 2 * tj, x, -y)));
                    worst = std::max(worst, std::abs(A(ti, tj, x, y) - C(2 * ti, 2 * tj, x, y) + C(2 * ti, 2 * tj, x, -y)));
                }
            EXPECT_LT(worst, 1e-8) << n << " " << ti << " " << tj;
        }
    }
}

TEST(Kernel, DiagonalPositivityAndTrace) {
    for (BC bc : {BC::reflect, BC::absorb}) {
        FiniteKernel K(bc, 3, 6.0);
        for (double x = 0.05; x < pi; x += 0.2) EXPECT_GE(K(3.0, 3.0, x, x), -1e-13);
        const double tr = oracle::simpson([&](double x) { return K(3.0, 3.0, x, x); }, 0, pi, 1e-11);
        EXPECT_NEAR(tr, 3.0, 1e-6) << to_string(bc);
    }
}

TEST(Kernel, CorrDet) {
    FiniteKernel K(BC::absorb, 3, 6.0);
    EXPECT_NEAR(corr_det(K, {{2.0, 1.1}}), K(2.0, 2.0, 1.1, 1.1), 1e-15);
    EXPECT_NEAR(corr_det(K, {{2.0, 1.1}, {2.0, 1.1}}), 0.0, 1e-12);
    const double d2 = corr_det(K, {{2.0, 1.1}, {2.0, 1.3}});
    EXPECT_LT(d2, K(2.0, 2.0, 1.1, 1.1) * K(2.0, 2.0, 1.3, 1.3));
    EXPECT_GT(d2, 0.0);
    EXPECT_NEAR(corr_det(BC::absorb, {{2.0, 1.1}}, 3, 6.0), corr_det(K, {{2.0, 1.1}}), 1e-15);
}

TEST(Kernel, JumpAtEqualTimesIsHeatKernel) {
    for (BC bc : {BC::reflect, BC::absorb}) {
        FiniteKernel K(bc, 2, 5.0);
        const double ti = 2.0, x = 1.2, y = 1.3;
        for (double d : {1e-3, 1e-4}) {
            // K-tilde is continuous in tj
            EXPECT_NEAR(kernel_tilde(bc, K.system(), ti, ti + d, x, y), kernel_tilde(bc, K.system(), ti, ti - d, x, y), 50 * d);
            const double jump = K(ti, ti + d, x, y) - K(ti, ti - d, x, y);
            const double expected = -trans_density(bc, x, y, d, 2);
            EXPECT_NEAR(jump, expected, 50 * d + 1e-12);
        }
        EXPECT_EQ(w_circ(bc, ti, ti, x, y, 2), 0.0);
    }
}

TEST(Kernel, UnderbuiltSystemRejected) {
    auto sys = build_system(3, 6.0, 3);
    EXPECT_THROW(kernel_finite(BC::reflect, sys, 1.0, 1.0, 0.5, 0.5), DomainError);
    EXPECT_THROW(kernel_finite(BC::reflect, build_system(3, 6.0, 5), 0.0, 1.0, 0.5, 0.5), DomainError);
}

TEST(Kernel, LargeNNearTheWall) {
    // at n = 64, T = 6, t = 1.75 the double lattice sums lose every digit near pi;
    // compare with the circle kernel at (2n, 2T), whose sums run over a different lattice
    const FiniteKernel C(BC::circle, 128, 12.0);
    for (BC bc : {BC::reflect, BC::absorb}) {
        const FiniteKernel K(bc, 64, 6.0);
        const double sign = bc == BC::reflect ? 1.0 : -1.0;
        for (double x : {pi - 0.01, pi - 0.2})
            for (double y : {pi - 0.03, pi - 0.3}) {
                const double a = K(1.75, 1.75, x, y), b = C(3.5, 3.5, x, y) + sign * C(3.5, 3.5, x, -y);
                EXPECT_NEAR(a, b, 1e-8 * std::max(1.0, std::abs(b))) << to_string(bc) << " " << x << " " << y;
            }
        for (double x = pi - 0.4; x < pi; x += 0.05) EXPECT_GT(K(1.75, 1.75, x, x), 0.0) << to_string(bc) << " " << x;
    }
}
