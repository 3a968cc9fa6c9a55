#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "wallbridge/dgop.hpp"
#include "wallbridge/specfun.hpp"

using namespace wallbridge;

namespace {

/// Classical Gram-Schmidt of monomials on the lattice, long double, low degree only.
struct GramSchmidt {
    std::vector<std::vector<long double>> coef;  // monic coefficients, coef[k][j] multiplies s^j
    std::vector<long double> h;
    GramSchmidt(int n, double T, int K) {
        std::vector<long double> s, w;
        for (int m = -4000; m <= 4000; ++m) {
            s.push_back((long double)m / n);
            w.push_back(std::exp(-(long double)n * T * s.back() * s.back() / 2) / n);
        }
        auto val = [&](const std::vector<long double>& c, long double x) {
            long double v = 0;
            for (int j = int(c.size()) - 1; j >= 0; --j) v = v * x + c[j];
            return v;
        };
        for (int k = 0; k <= K; ++k) {
            std::vector<long double> c(k + 1, 0);
            c[k] = 1;
            for (int j = 0; j < k; ++j) {
                long double ip = 0;
                for (std::size_t i = 0; i < s.size(); ++i) ip += w[i] * std::pow(s[i], k) * val(coef[j], s[i]);
                for (int l = 0; l <= j; ++l) c[l] -= ip / h[j] * coef[j][l];
            }
            long double hk = 0;
            for (std::size_t i = 0; i < s.size(); ++i) hk += w[i] * val(c, s[i]) * val(c, s[i]);
            coef.push_back(c);
            h.push_back(hk);
        }
    }
    double p(int k, double x) const {
        long double v = 0;
        for (int j = k; j >= 0; --j) v = v * x + coef[k][j];
        return double(v);
    }
};

}  // namespace

TEST(Dgop, LowDegreeExamples) {
    auto sys = build_system(4, 5.0, 8);
    for (double x : {-1.3, 0.0, 0.7}) {
        EXPECT_EQ(eval_p(sys, 0, x), 1.0);
        EXPECT_NEAR(eval_p(sys, 1, x), x, 1e-15);
    }
    EXPECT_NEAR(eval_p(sys, 2, 0.0), -sys.b[1], 1e-16);
    EXPECT_NEAR(eval_p(sys, 3, -0.7), -eval_p(sys, 3, 0.7), 1e-15);
    EXPECT_THROW(eval_p(sys, 9, 0.1), DomainError);
}

TEST(Dgop, NormZeroIsTheta) {
    auto sys = build_system(4, 5.0, 4);
    double direct = 0;
    for (int m = -200; m <= 200; ++m) direct += std::exp(-5.0 * m * m / 8.0) / 4;
    EXPECT_NEAR(sys.h[0], direct, 1e-15);
    EXPECT_NEAR(sys.h[0], theta3(0.0, std::exp(-5.0 / 8)).real() / 4, 1e-15);
}

TEST(Dgop, AgreesWithGramSchmidt) {
    for (auto [n, T] : {std::pair{3, 6.0}, {4, 5.0}, {8, pi * pi}}) {
        const int K = 7;
        auto sys = build_system(n, T, K);
        GramSchmidt gs(n, T, K);
        for (int k = 0; k <= K; ++k) {
            EXPECT_NEAR(sys.h[k] / double(gs.h[k]), 1.0, 1e-10) << n << " " << k;
            for (double x : {0.1, 0.5, 1.2}) EXPECT_NEAR(eval_p(sys, k, x), gs.p(k, x), 1e-9 * std::max(1.0, std::abs(gs.p(k, x))));
        }
    }
}

TEST(Dgop, OrthogonalityAndPositivity) {
    for (auto [n, T] : {std::pair{3, 6.0}, {4, 5.0}, {8, pi * pi}, {64, pi * pi / 2}}) {
        auto sys = build_system(n, T, std::min(4 * n, 2 * n + 2));
        EXPECT_LT(orthogonality_residual(sys), 1e-10);
        for (int k = 1; k <= sys.kmax; ++k) EXPECT_GT(sys.b[k], 0.0);
        for (double hk : sys.h) EXPECT_GT(hk, 0.0);
    }
}

TEST(Dgop, LanczosAgreesWithStieltjes) {
    const int n = 5, K = 12;
    const double T = 6.0;
    const auto sys = build_system(n, T, K);
    std::vector<double> b, h;
    ASSERT_TRUE(detail::lanczos<long double>(n, T, K, sys.lattice_cutoff, b, h));
    for (int k = 0; k <= K; ++k) {
        EXPECT_NEAR(h[k] / sys.h[k], 1.0, 1e-11) << k;
        if (k) {
            EXPECT_NEAR(b[k] / sys.b[k], 1.0, 1e-11) << k;
        }
    }
}

TEST(Dgop, HighDegreeLimit) {
    // monic values near degree 2n overflow double products; the residual uses the orthonormal recurrence
    EXPECT_LT(orthogonality_residual(build_system(128, pi * pi / 2, 255)), 1e-10);
    // deep in the supercritical phase the double-rounded coefficients alone leave ~1e-8
    const auto loose = build_system(128, 6.0, 255, 0, false);
    EXPECT_TRUE(loose.extended_precision);
    EXPECT_GT(orthogonality_residual(loose), 1e-10);
    EXPECT_THROW(build_system(128, 6.0, 255), ConvergenceError);
}

TEST(Dgop, RescalingIdentities) {
    const int n = 3;
    const double T = 6.0;
    auto a = build_system(n, T, 2 * n), b = build_system(2 * n, 2 * T, 2 * n);
    for (int k = 0; k <= 2 * n; ++k) {
        EXPECT_NEAR(a.h[k] / (std::pow(2.0, 2 * k + 1) * b.h[k]), 1.0, 1e-10);
        EXPECT_NEAR(eval_p(a, k, 0.9), std::pow(2.0, k) * eval_p(b, k, 0.45), 1e-10 * std::max(1.0, std::abs(eval_p(a, k, 0.9))));
    }
    EXPECT_NEAR(eval_p(a, 4, 0.9), 16 * eval_p(b, 4, 0.45), 1e-10);
}

TEST(Dgop, LatticeDoublingStable) {
    auto a = build_system(4, 5.0, 16);
    auto b = build_system(4, 5.0, 16, 2 * a.lattice_cutoff);
    for (int k = 0; k <= 16; ++k) {
        EXPECT_NEAR(a.h[k] / b.h[k], 1.0, 1e-12);
        if (k) {
            EXPECT_NEAR(a.b[k] / b.b[k], 1.0, 1e-12);
        }
    }
}

TEST(Dgop, STransformParityAndScaling) {
    auto a = build_system(3, 6.0, 6), b = build_system(6, 12.0, 6);
    for (int k : {2, 3}) {
        const cplx sp = s_transform(a, k, 1.5, 0.4), sm = s_transform(a, k, 1.5, -0.4);
        EXPECT_LT(std::abs(sm - (k % 2 ? -sp : sp)), 1e-14);
    }
    EXPECT_LT(std::abs(s_transform(a, 2, 1.5, 0.4) - 8.0 * s_transform(b, 2, 3.0, 0.4)), 1e-12);
    EXPECT_LT(std::abs(s_transform(a, 3, 1.5, 0.4) - 16.0 * s_transform(b, 3, 3.0, 0.4)), 1e-12);
    EXPECT_NEAR(s_transform(a, 0, 1.5, 0.0).real(), theta3(0.0, std::exp(-1.5 / 6)).real() / 3, 1e-14);
    EXPECT_EQ(s_transform(a, 2, 1.5, 0.4).imag(), 0.0);
    EXPECT_EQ(s_transform(a, 3, 1.5, 0.4).real(), 0.0);
    EXPECT_THROW(s_transform(a, 2, 0.0, 0.4), DomainError);
}

TEST(Dgop, STransformDirectSum) {
    auto a = build_system(3, 6.0, 6);
    const double x = 1.1, al = 0.7;
    for (int k : {0, 2, 4, 5}) {
        cplx direct = 0;
        for (int m = -400; m <= 400; ++m) {
            const double s = m / 3.0;
            direct += eval_p(a, k, s) * std::exp(-3 * al * s * s / 2) * std::exp(cplx(0, 3 * s * x)) / 3.0;
        }
        EXPECT_LT(std::abs(s_transform(a, k, al, x) - direct), 1e-12) << k;
    }
}

TEST(Dgop, Domain) {
    EXPECT_THROW(build_system(0, 1.0, 1), DomainError);
    EXPECT_THROW(build_system(2, -1.0, 1), DomainError);
    EXPECT_THROW(build_system(2, 1.0, 9), DomainError);
}

TEST(Dgop, CacheRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "wallbridge-cache-test";
    std::filesystem::remove_all(dir);
    setenv("WALLBRIDGE_CACHE_DIR", dir.c_str(), 1);
    auto a = build_system(5, 4.0, 12);
    auto b = build_system(5, 4.0, 12);
    unsetenv("WALLBRIDGE_CACHE_DIR");
    EXPECT_EQ(a.b, b.b);
    EXPECT_EQ(a.h, b.h);
    EXPECT_FALSE(std::filesystem::is_empty(dir));
    std::filesystem::remove_all(dir);
}
