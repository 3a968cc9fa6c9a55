#include <gtest/gtest.h>

#include "wallbridge/schlesinger.hpp"

using namespace wallbridge;

namespace {

const HMTable& hm() {
    static const HMTable t = hm_solve();
    return t;
}

const TacnodeContext& ctx() {
    static const TacnodeContext c(hm());
    return c;
}

const double r13 = std::cbrt(2.0), r23 = r13 * r13;

}  // namespace

TEST(LaxPoint, ScalarRelations) {
    const auto p = lax_point(0, 0.4, 0.3, hm());
    EXPECT_NEAR(p.sigma, r23 * (0.8 - 0.09), 1e-15);
    EXPECT_NEAR(p.beta_nu - p.delta_nu, 0.6, 1e-14);
    EXPECT_NEAR(p.beta_nu * p.delta_nu + p.gamma_nu, 1.0 / (2 * p.alpha_nu), 1e-9);
    EXPECT_EQ(lax_point(1, 0.7, 0.0, hm()).bmh, 0.0);
    // closed forms of g + a and gamma in q, u
    const double q = p.q, u = p.u, s = p.s;
    EXPECT_NEAR(p.ga, (q * q - u * u) / r23 + r23 * s * s * u - s * s * s * s + s, 1e-13);
    EXPECT_NEAR(p.gamma_nu, (q * q - u * u) / r23 + r23 * s * s * (q + u) - r13 * (q * u + p.qp) + 2 * s - s * s * s * s, 1e-13);
    // alpha_nu = 2^{-1/3}(q_{nu+1} + q_nu) = 2^{-1/3}(u_{nu+1} - u_nu)
    const auto p1 = lax_point(1, 0.4, 0.3, hm());
    EXPECT_NEAR(p.alpha_nu, (p1.q + p.q) / r13, 1e-12);
    EXPECT_NEAR(p.alpha_nu, (p1.u - p.u) / r13, 1e-12);
}

TEST(LaxPair, TracesAndNuFreeForm) {
    const auto p = lax_point(1, 0.4, 0.3, hm());
    const cplx z(1.0, 0.5);
    EXPECT_LT(std::abs(lax_U(p, z).trace()), 1e-15);
    EXPECT_LT(std::abs(lax_V(p, z).trace()), 1e-15);
    auto p0 = lax_point(0, 0.4, 0.3, hm());
    const Mat4 U0 = lax_U(p0, z), U0b = lax_U(p0, 3.0 * z);
    // with nu = 0 only the (3,1), (4,2) entries move with z
    Mat4 diff = U0b - U0;
    EXPECT_NEAR(std::abs(diff(2, 0) - I * 2.0 * z), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(diff(3, 1) + I * 2.0 * z), 0.0, 1e-14);
    diff(2, 0) = diff(3, 1) = 0.0;
    EXPECT_EQ(max_abs(diff), 0.0);
    EXPECT_THROW(lax_U(p, 0.0), DomainError);
}

TEST(Schlesinger, ResidualOnGrid) {
    double worst = 0.0, ident = 0.0;
    for (int nu = 0; nu < 2; ++nu)
        for (double s : {-0.5, 0.4, 1.5})
            for (double tau : {-0.4, 0.0, 0.3})
                for (cplx z : {cplx(1, 0.5), cplx(0.3, -1.2), cplx(-2.0, 0.7)}) {
                    const auto c = schlesinger_residual(lax_point(nu, s, tau, hm()), lax_point(nu + 1, s, tau, hm()), z);
                    worst = std::max(worst, c.residual);
                    ident = std::max({ident, c.inverse, c.rdr, c.rd, c.beta_delta_gamma, c.commutator});
                }
    EXPECT_LT(worst, 1e-8);
    EXPECT_LT(ident, 1e-12);
}

TEST(Schlesinger, SampleResidual) {
    const auto c = schlesinger_residual(lax_point(0, 0.4, 0.3, hm()), lax_point(1, 0.4, 0.3, hm()), cplx(1, 0.5));
    EXPECT_LT(c.residual, 1e-8);
    EXPECT_LT(c.inverse, 1e-12);
    EXPECT_LT(c.rdr, 1e-12);
    EXPECT_THROW(schlesinger_residual(lax_point(0, 0.4, 0.3, hm()), lax_point(1, 0.4, 0.2, hm()), 1.0), DomainError);
}

TEST(Schlesinger, ResidualWithIndependentBVPData) {
    // U_1 from a nu = 1 boundary-value solve that never touches the Baecklund map
    const auto b = hm_solve_single(1.0, 12.0, 0.005);
    const auto dq = detail::derivative7(b.q, 0.005);
    const double s = 0.4, tau = 0.3, sg = lax_sigma(s, tau);
    const std::size_t i = std::size_t(std::lround((sg + 12.0) / 0.005));
    // shift s so that sigma lands on the grid node exactly
    const double s_node = (b.sigma[i] / r23 + tau * tau) / 2;
    const auto p1 = lax_point(1.0, s_node, tau, b.q[i], dq[i], hamiltonian_u(b.sigma[i], b.q[i], dq[i], 1.0));
    const auto c = schlesinger_residual(lax_point(0, s_node, tau, hm()), p1, cplx(1, 0.5));
    EXPECT_LT(c.residual, 1e-6);
    // a wrong nu + 1 level is caught
    const auto wrong = lax_point(1.0, s_node, tau, 1.1 * b.q[i], dq[i], hamiltonian_u(b.sigma[i], 1.1 * b.q[i], dq[i], 1.0));
    EXPECT_GT(schlesinger_residual(lax_point(0, s_node, tau, hm()), wrong, cplx(1, 0.5)).residual, 1e-3);
}

TEST(LaxPair, ZeroCurvature) {
    double worst = 0.0;
    for (int nu = 0; nu <= 2; ++nu)
        for (double s : {-0.3, 0.5})
            for (double tau : {0.0, 0.4})
                for (cplx z : {cplx(1, 0.5), cplx(-0.7, 2.0)}) worst = std::max(worst, zero_curvature_residual(nu, s, tau, z, hm()));
    EXPECT_LT(worst, 1e-6);
}

TEST(NVector, SatisfiesLaxODE) {
    const double z = 1.2, s = 0.5, tau = 0.2, h = 1e-4;
    const auto n = n0_vector(z, s, tau, ctx()), np = n0_vector(z + h, s, tau, ctx()), nm = n0_vector(z - h, s, tau, ctx());
    const Vec4 r = (np.value - nm.value) / (2 * h) - lax_U(lax_point(0, s, tau, hm()), z) * n.value;
    EXPECT_LT(r.norm(), 1e-5);
    // the ladder vectors solve their own nu = k equation
    for (int k = 1; k <= 2; ++k) {
        const auto a = n_vector(k, z, s, tau, ctx()), ap = n_vector(k, z + h, s, tau, ctx()), am = n_vector(k, z - h, s, tau, ctx());
        EXPECT_LT(((ap.value - am.value) / (2 * h) - lax_U(lax_point(k, s, tau, hm()), z) * a.value).norm(), 1e-5) << k;
    }
}

TEST(NVector, FAssembliesAgree) {
    const double z = 1.5, s = 0.6, tau = 0.1;
    for (int k = 0; k <= 2; ++k) {
        const auto a = F_explicit(k, z, s, tau, ctx()), b = F_ladder(k, z, s, tau, ctx());
        EXPECT_LT(std::abs(a.value - b.value), 1e-7) << k;
        EXPECT_LT(std::abs(a.value.imag()), 1e-8) << k;
    }
    EXPECT_LT(std::abs(F_ladder(3, z, s, tau, ctx()).value.imag()), 1e-8);
    EXPECT_THROW(F_ladder(5, z, s, tau, ctx()), DomainError);
}

TEST(NVector, TauZeroFlipsOnlyTheSign) {
    // at tau = 0 the F_0 and F_1 integrands differ only by g -> -g
    const auto P = ctx().slice(lax_sigma(0.6, 0.0));
    const auto& r = ctx().rule();
    cplx f = 0.0, g = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const cplx e = r.weights[i] * std::exp(r23 * I * 1.5 * r.nodes[i]) * std::pow(2.0, 1.0 / 6.0) / std::sqrt(pi);
        f += e * P.f[i];
        g += e * P.g[i];
    }
    EXPECT_LT(std::abs(F_explicit(0, 1.5, 0.6, 0.0, ctx()).value - (f + g)), 1e-13);
    EXPECT_LT(std::abs(F_explicit(1, 1.5, 0.6, 0.0, ctx()).value - (f - g)), 1e-13);
}

TEST(NVector, DecaysInS) {
    const double a = n0_vector(1.2, 1.0, 0.2, ctx()).value.norm(), b = n0_vector(1.2, 6.0, 0.2, ctx()).value.norm();
    EXPECT_LT(b, 1e-6 * a);
}

TEST(HardTacnode, RoutesAgree) {
    for (double alpha : {-0.5, 0.5}) {
        const auto K = hard_tacnode(alpha, 0.6, 0.9, 0.5, 0.2, ctx());
        EXPECT_NEAR(K.value, K.route_b, 1e-4) << alpha;
        EXPECT_LE(std::abs(K.imag), K.err + 1e-12);
    }
    // diagonal through the limit of the 1/(x - y) term
    const auto D = hard_tacnode(-0.5, 0.7, 0.7, 0.5, 0.2, ctx());
    EXPECT_NEAR(D.value, D.route_b, 1e-4);
    EXPECT_GT(D.value, 0.0);
}

TEST(HardTacnode, EvenOddTacnodeRelations) {
    struct P {
        double x, y, s, tau;
    };
    for (const P& p : {P{0.6, 0.9, 0.5, 0.2}, P{0.3, 1.1, 0.0, -0.3}, P{1.0, 0.5, 1.0, 0.4}}) {
        const auto rel = tacnode_relation(p.s, p.tau);
        for (int k = 0; k < 2; ++k) {
            const auto K = hard_tacnode(k - 0.5, p.x, p.y, p.s, p.tau, ctx());
            const auto T = tacnode_parity(ctx(), k == 0 ? Parity::even : Parity::odd, rel.t, rel.t, r23 * p.x, r23 * p.y, rel.sigma, true);
            EXPECT_NEAR(K.value, rel.scale * T.value, 1e-4) << k << " " << p.x << " " << p.y;
        }
    }
}

TEST(HardTacnode, PrintedRelationConstantsDoNotHold) {
    const auto rel = tacnode_relation_printed(0.5, 0.2);
    const auto K = hard_tacnode(-0.5, 0.6, 0.9, 0.5, 0.2, ctx());
    const auto T = tacnode_parity(ctx(), Parity::even, rel.t, rel.t, r23 * 0.6, r23 * 0.9, rel.sigma, true);
    EXPECT_GT(std::abs(K.value - rel.scale * T.value), 1e-2);
}

TEST(HardTacnode, SDerivativeIsRankOne) {
    const double x = 0.6, y = 0.9, s = 0.5, tau = 0.2, h = 1e-3;
    const double d = (hard_tacnode_bilinear(0, x, y, s + h, tau, ctx()).first - hard_tacnode_bilinear(0, x, y, s - h, tau, ctx()).first).real() / (2 * h);
    const cplx r = -F_k(0, x, s, tau, ctx()).value * F_k(0, y, s, -tau, ctx()).value / pi;
    EXPECT_NEAR(d, r.real(), 1e-4);
}

TEST(HardTacnode, DecaysMonotonicallyInS) {
    for (int k = 0; k < 2; ++k) {
        double prev = 1e300;
        for (double s : {4.0, 5.0, 6.0, 7.0, 8.0}) {
            const double v = std::abs(hard_tacnode_bilinear(k, 0.6, 0.9, s, 0.2, ctx()).first.real());
            EXPECT_LT(v, prev) << k << " " << s;
            prev = v;
        }
        EXPECT_LT(prev, 1e-8);
    }
}

TEST(HardTacnode, HigherOrderAndDomain) {
    HardTacnodeOptions o;
    o.cross_check = false;
    const auto K = hard_tacnode(1.5, 0.6, 0.9, 0.5, 0.2, ctx(), o);
    EXPECT_NEAR(K.value, K.route_b, 1e-4);
    EXPECT_THROW(hard_tacnode(0.0, 0.6, 0.9, 0.5, 0.2, ctx()), DomainError);
    EXPECT_THROW(hard_tacnode(-1.5, 0.6, 0.9, 0.5, 0.2, ctx()), DomainError);
    EXPECT_THROW(hard_tacnode(0.5, -0.6, 0.9, 0.5, 0.2, ctx()), DomainError);
}
