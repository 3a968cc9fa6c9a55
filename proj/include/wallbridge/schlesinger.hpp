#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"
#include "limit_kernels.hpp"
#include "painleve.hpp"
#include "quadrature.hpp"

namespace wallbridge {

using Mat4 = Eigen::Matrix4cd;
using Vec4 = Eigen::Vector4cd;

namespace detail {
inline const double c13 = std::cbrt(2.0);  // 2^{1/3}
inline const double c23 = c13 * c13;       // 2^{2/3}
}  // namespace detail

/// sigma = 2^{2/3}(2s - tau^2).
inline double lax_sigma(double s, double tau) { return detail::c23 * (2 * s - tau * tau); }

/// Scalars of the 4x4 Lax pair at (nu, s, tau) built from q_nu, q_nu', u_nu at sigma.
struct LaxPoint {
    double nu = 0, s = 0, tau = 0, sigma = 0;
    double q = 0, qp = 0, u = 0;
    double c = 0, d = 0, ga = 0, bmh = 0, bph = 0;
    double alpha_nu = 0, beta_nu = 0, gamma_nu = 0, delta_nu = 0;
};

inline LaxPoint lax_point(double nu, double s, double tau, double q, double qp, double u) {
    using detail::c13;
    using detail::c23;
    LaxPoint p;
    p.nu = nu;
    p.s = s;
    p.tau = tau;
    p.sigma = lax_sigma(s, tau);
    p.q = q;
    p.qp = qp;
    p.u = u;
    p.c = -u / c13 + s * s;
    p.d = q / c13;
    p.ga = -p.c * p.c + p.d * p.d + s;
    p.bmh = 2 * tau * p.d;
    p.bph = -c13 * (qp + q * u) + c23 * s * s * q;
    const double D = 2 * q * q - 2 * qp + p.sigma;
    if (std::abs(D) < 1e-13) throw ConvergenceError(detail::cat("lax_point: alpha_nu has a pole at sigma = ", p.sigma));
    p.alpha_nu = (2 * nu + 1) / (c13 * D);
    p.beta_nu = p.c - p.d + tau;
    p.gamma_nu = p.bph + p.ga + s;
    p.delta_nu = p.c - p.d - tau;
    return p;
}

inline LaxPoint lax_point(int nu, double s, double tau, const HMTable& hm) {
    const double sg = lax_sigma(s, tau);
    const auto h = hm.eval(nu, sg);
    return lax_point(double(nu), s, tau, h.q, h.qp, h.u);
}

inline Mat4 lax_U(const LaxPoint& p, cplx z) {
    if (z == 0.0) throw DomainError("lax_U: z = 0 is a pole");
    const cplx n = p.nu / z;
    const double c = p.c, d = p.d, t = p.tau;
    Mat4 U;
    U << -c + t, d + n, I, 0.0,
         -d + n, c - t, 0.0, I,
         -I * (-z + p.ga + p.s), -I * p.bph, c + t, d - n,
         -I * p.bph, -I * (z + p.ga + p.s), -d - n, -c - t;
    return U;
}

inline Mat4 lax_V(const LaxPoint& p, cplx z) {
    const double c = p.c, d = p.d;
    Mat4 V;
    V << c, d, -I, 0.0,
         d, c, 0.0, I,
         I * (-z + p.ga), I * p.bmh, -c, -d,
         -I * p.bmh, -I * (z + p.ga), -d, -c;
    return 2.0 * V;
}

inline Mat4 schlesinger_Sigma() { return Vec4(1.0, -1.0, 1.0, -1.0).asDiagonal(); }

inline Mat4 schlesinger_R(const LaxPoint& p) {
    const double b = p.beta_nu, g = p.gamma_nu, dl = p.delta_nu;
    Mat4 R;
    R << b, b, -I, I,
         -b, -b, I, -I,
         I * g, I * g, -dl, dl,
         I * g, I * g, -dl, dl;
    return R;
}

/// The matrix D(x, y) of the hard-edge kernel.
inline Mat4 kernel_D(double x, double y) {
    Mat4 D;
    D << x + y, y - x, 0.0, 0.0,
         y - x, x + y, 0.0, 0.0,
         0.0, 0.0, x + y, x - y,
         0.0, 0.0, x - y, x + y;
    return D;
}

/// W with Sigma U_nu Sigma + W = U_{nu+1}.
inline Mat4 schlesinger_W(const LaxPoint& p, cplx z) {
    const cplx bd = -I * (p.beta_nu + p.delta_nu);
    Mat4 A, P;
    A << 1.0, 1.0, 0.0, 0.0,
         -1.0, -1.0, 0.0, 0.0,
         bd, bd, -1.0, 1.0,
         bd, bd, -1.0, 1.0;
    P << 0.0, 1.0, 0.0, 0.0,
         1.0, 0.0, 0.0, 0.0,
         0.0, 0.0, 0.0, -1.0,
         0.0, 0.0, -1.0, 0.0;
    return p.alpha_nu * A + ((2 * p.nu + 1) / z) * P;
}

inline double max_abs(const Mat4& M) { return M.cwiseAbs().maxCoeff(); }

struct SchlesingerCheck {
    double residual = 0;        ///< |Sigma U_nu Sigma + W - U_{nu+1}|_inf
    double inverse = 0;         ///< |(I + a R/z)(I - a R/z) - I|
    double rdr = 0;             ///< |R D R| with x = y = 1
    double rd = 0;              ///< |R D/(2y) - R| + |D R/(2x) - R| with x = y = 1
    double beta_delta_gamma = 0;
    double commutator = 0;      ///< |R SUS - SUS R - (z/a W + W R + R/z)|
};

inline SchlesingerCheck schlesinger_residual(const LaxPoint& p0, const LaxPoint& p1, cplx z) {
    if (p1.nu != p0.nu + 1 || p1.s != p0.s || p1.tau != p0.tau) throw DomainError("schlesinger_residual: p_nu1 must be built at nu + 1 with the same (s, tau)");
    const Mat4 S = schlesinger_Sigma(), R = schlesinger_R(p0), W = schlesinger_W(p0, z), Id = Mat4::Identity();
    const Mat4 SUS = S * lax_U(p0, z) * S;
    SchlesingerCheck c;
    c.residual = max_abs(SUS + W - lax_U(p1, z));
    const cplx a = p0.alpha_nu / z;
    c.inverse = max_abs((Id + a * R) * (Id - a * R) - Id);
    const Mat4 D = kernel_D(1.0, 1.0);
    c.rdr = max_abs(R * D * R);
    c.rd = max_abs(R * D / 2.0 - R) + max_abs(D * R / 2.0 - R);
    c.beta_delta_gamma = std::abs(p0.beta_nu * p0.delta_nu + p0.gamma_nu - (2 * p0.nu + 1) / (2 * p0.alpha_nu));
    c.commutator = max_abs(R * SUS - SUS * R - (z / p0.alpha_nu * W + W * R + R / z));
    return c;
}

/// |dU/ds - dV/dz + [U, V]| with dU/ds from 5-point differences in s at fixed tau.
inline double zero_curvature_residual(int nu, double s, double tau, cplx z, const HMTable& hm, double h = 1e-3) {
    const auto at = [&](double ss) { return lax_U(lax_point(nu, ss, tau, hm), z); };
    const Mat4 dU = (at(s - 2 * h) - 8.0 * at(s - h) + 8.0 * at(s + h) - at(s + 2 * h)) / (12 * h);
    const auto p = lax_point(nu, s, tau, hm);
    Mat4 dV = Mat4::Zero();
    dV(2, 0) = -2.0 * I;
    dV(3, 1) = -2.0 * I;
    const Mat4 U = lax_U(p, z), V = lax_V(p, z);
    return max_abs(dU - dV + U * V - V * U);
}

// ---------------------------------------------------------------------------
// n-vectors and F_k
// ---------------------------------------------------------------------------

struct Vec4Value {
    Vec4 value;
    double err;
};

namespace detail {

inline const double n0_pref = std::pow(2.0, 1.0 / 6.0) / std::sqrt(pi);

/// int_{Sigma_T} e^{2^{4/3} tau zeta^2 + 2^{2/3} i z zeta} h(zeta, f, g) d zeta on
/// both node sets; h returns a Vec4 contribution.
template <class H>
Vec4Value sigma_t_integral(const TacnodeContext& ctx, const PsiSlice& P, double z, double tau, H&& h) {
    const auto& r = ctx.rule();
    Vec4 fine = Vec4::Zero(), coarse = Vec4::Zero();
    double mass = 0.0;
    const double a = 2 * c13 * tau;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const cplx u = r.nodes[i];
        const Vec4 v = r.weights[i] * std::exp(a * u * u + c23 * I * z * u) * h(u, P.f[i], P.g[i]);
        fine += v;
        mass += v.cwiseAbs().maxCoeff();
    }
    for (std::size_t i = 0; i < r.check_nodes.size(); ++i) {
        const cplx u = r.check_nodes[i];
        coarse += r.check_weights[i] * std::exp(a * u * u + c23 * I * z * u) * h(u, P.fc[i], P.gc[i]);
    }
    return {n0_pref * fine, n0_pref * ((fine - coarse).cwiseAbs().maxCoeff() + 4e-16 * mass)};
}

inline void check_n0(const TacnodeContext& ctx, double z, double s, double tau) {
    if (!(z > 0)) throw DomainError(cat("n0_vector: z = ", z, " must be positive"));
    const double a = 4 * c13 * std::abs(tau);  // s u^2/2 with s = 2^{7/3}|tau| is 2^{4/3}|tau| u^2
    ctx.check_radius(a, a, c23 * z, 0.0, lax_sigma(s, tau));
}

}  // namespace detail

/// n_0(z; s, tau) from the Flaschka-Newell f, g at sigma = 2^{2/3}(2s - tau^2).
inline Vec4Value n0_vector(double z, double s, double tau, const TacnodeContext& ctx) {
    using detail::c13;
    using detail::c23;
    detail::check_n0(ctx, z, s, tau);
    const double sg = lax_sigma(s, tau);
    const auto h = ctx.hm().eval(0, sg);
    const auto& P = ctx.slice(sg);
    const cplx A = I * (tau - s * s + h.u / c13);
    const cplx iq = I * h.q / c13;
    return detail::sigma_t_integral(ctx, P, z, tau, [&](cplx u, cplx f, cplx g) {
        return Vec4(f, g, (A + c23 * u) * f + iq * g, (-A + c23 * u) * g - iq * f);
    });
}

/// n_k = (Sigma + alpha_{k-1} R_{k-1} Sigma/z) ... (Sigma + alpha_0 R_0 Sigma/z) n_0.
inline Vec4Value n_vector(int k, double z, double s, double tau, const TacnodeContext& ctx) {
    if (k < 0) throw DomainError(detail::cat("n_vector: k = ", k, " must be >= 0"));
    if (k > ctx.hm().ladder_max() + 1) throw DomainError(detail::cat("n_vector: k = ", k, " needs ladder depth ", k - 1, ", have ", ctx.hm().ladder_max()));
    auto n = n0_vector(z, s, tau, ctx);
    const Mat4 S = schlesinger_Sigma();
    for (int j = 0; j < k; ++j) {
        const auto p = lax_point(j, s, tau, ctx.hm());
        const Mat4 T = S + (p.alpha_nu / z) * schlesinger_R(p) * S;
        n.value = T * n.value;
        n.err *= T.cwiseAbs().rowwise().sum().maxCoeff();
    }
    return n;
}

struct FValue {
    cplx value;
    double err;
};

/// F_k(z; s, tau) = n_k[1] + n_k[2] through the Schlesinger product.
inline FValue F_ladder(int k, double z, double s, double tau, const TacnodeContext& ctx) {
    const auto n = n_vector(k, z, s, tau, ctx);
    return {n.value(0) + n.value(1), 2 * n.err};
}

/// F_0, F_1, F_2 from their closed contour-integral forms.
inline FValue F_explicit(int k, double z, double s, double tau, const TacnodeContext& ctx) {
    using detail::c13;
    using detail::c23;
    if (k < 0 || k > 2) throw DomainError(detail::cat("F_explicit: closed forms exist for k = 0, 1, 2, asked ", k));
    detail::check_n0(ctx, z, s, tau);
    const double sg = lax_sigma(s, tau);
    const auto& P = ctx.slice(sg);
    // components: int (f+g), int (f-g), int zeta (f+g)
    const auto v = detail::sigma_t_integral(ctx, P, z, tau, [](cplx u, cplx f, cplx g) { return Vec4(f + g, f - g, u * (f + g), 0.0); });
    if (k == 0) return {v.value(0), v.err};
    if (k == 1) return {v.value(1), v.err};
    const auto p = lax_point(0, s, tau, ctx.hm());
    const double a = p.alpha_nu;
    const cplx val = v.value(0) + a * (4 * tau - 2 * c23 * p.q) / z * v.value(1) - 2.0 * I * c23 * a / z * v.value(2);
    return {val, v.err * (1 + std::abs(a) * (std::abs(4 * tau) + 3 * std::abs(p.q) + 4) / z)};
}

inline FValue F_k(int k, double z, double s, double tau, const TacnodeContext& ctx) {
    return k <= 2 ? F_explicit(k, z, s, tau, ctx) : F_ladder(k, z, s, tau, ctx);
}

// ---------------------------------------------------------------------------
// Hard-edge tacnode
// ---------------------------------------------------------------------------

struct HardTacnodeValue {
    double value = 0;  ///< route A
    double err = 0;
    double route_b = 0;
    double route_b_err = 0;
    double imag = 0;
};

namespace detail {

inline int hard_tac_index(double alpha) {
    const double k = alpha + 0.5;
    if (!(k >= 0) || std::abs(k - std::round(k)) > 1e-12)
        throw DomainError(cat("hard_tacnode: alpha = ", alpha, " must be a half-integer >= -1/2"));
    return int(std::round(k));
}

}  // namespace detail

/// Route B: (-1,0,1,0) M(y)^{-1} D M(x) (1,0,1,0)^T / (2 pi i (x^2 - y^2)) with
/// M(y)^{-1} written through M(y; s, -tau). The 1/(x - y) part at x = y takes
/// its limit from n_k' = U_k n_k.
inline std::pair<cplx, double> hard_tacnode_bilinear(int k, double x, double y, double s, double tau, const TacnodeContext& ctx) {
    const auto nx = n_vector(k, x, s, tau, ctx), ny = n_vector(k, y, s, -tau, ctx);
    const Vec4& a = ny.value;
    const Vec4& b = nx.value;
    auto minus = [&](const Vec4& m) { return a(0) * m(2) + a(1) * m(3) - a(2) * m(0) - a(3) * m(1); };
    const cplx plus = a(0) * b(3) + a(1) * b(2) + a(2) * b(1) + a(3) * b(0);
    cplx first;
    if (std::abs(x - y) < 1e-8) {
        const Vec4 db = lax_U(lax_point(k, s, tau, ctx.hm()), x) * b;
        first = minus(db);
    } else {
        first = minus(b) / (x - y);
    }
    const cplx v = (first + plus / (x + y)) / (2 * pi * I);
    const double scale = (a.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff());
    const double err = 4 * scale * (nx.err + ny.err) * (1 / std::max(std::abs(x - y), 1e-3) + 1 / (x + y)) / (2 * pi);
    return {v, err};
}

struct HardTacnodeOptions {
    double s_extent = 5.0;   ///< integrate s~ up to max(s + s_extent, s_floor)
    double s_floor = 7.0;
    double panel_width = 1.0;
    bool cross_check = true;
};

/// K^{tac,(alpha)}(x, y; s, tau) for alpha = k - 1/2 as (1/pi) int_s^inf F_k(x; s~, tau) F_k(y; s~, -tau) ds~,
/// checked against the bilinear n-vector form for k = 0, 1.
inline HardTacnodeValue hard_tacnode(double alpha, double x, double y, double s, double tau, const TacnodeContext& ctx,
                                     const HardTacnodeOptions& opt = {}) {
    const int k = detail::hard_tac_index(alpha);
    if (!(x > 0 && y > 0)) throw DomainError(detail::cat("hard_tacnode: x, y = ", x, ", ", y, " must be positive"));
    const double smax = std::max(s + opt.s_extent, opt.s_floor);
    const int panels = std::max(1, int(std::ceil((smax - s) / opt.panel_width)));
    const auto& g24 = gauss_legendre(24);
    const auto& g12 = gauss_legendre(12);
    auto integrand = [&](double st) {
        const auto a = F_k(k, x, st, tau, ctx), b = F_k(k, y, st, -tau, ctx);
        return std::pair<cplx, double>{a.value * b.value, std::abs(a.value) * b.err + std::abs(b.value) * a.err};
    };
    cplx fine = 0.0, coarse = 0.0;
    double inner = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = s + (smax - s) * p / panels, hi = s + (smax - s) * (p + 1) / panels;
        const double mid = (lo + hi) / 2, half = (hi - lo) / 2;
        for (std::size_t j = 0; j < g24.x.size(); ++j) {
            const auto [v, e] = integrand(mid + half * g24.x[j]);
            fine += half * g24.w[j] * v;
            inner += half * g24.w[j] * e;
        }
        for (std::size_t j = 0; j < g12.x.size(); ++j) coarse += half * g12.w[j] * integrand(mid + half * g12.x[j]).first;
    }
    const double tail = std::abs(integrand(smax).first);
    HardTacnodeValue out;
    out.value = fine.real() / pi;
    out.imag = fine.imag() / pi;
    out.err = (std::abs(fine - coarse) + inner + tail) / pi;
    const auto [b, be] = hard_tacnode_bilinear(k, x, y, s, tau, ctx);
    out.route_b = b.real();
    out.route_b_err = be;
    if (opt.cross_check && k <= 1 && std::abs(out.value - out.route_b) > out.err + be + 1e-10)
        throw ConsistencyError(detail::cat("hard_tacnode: integral route ", out.value, " and bilinear route ", out.route_b, " differ by ",
                                           std::abs(out.value - out.route_b), " > ", out.err + be));
    return out;
}

/// Constants of the even/odd tacnode relation: K^{tac,(-+1/2)}(x, y; s, tau) =
/// scale * K-tilde^{even/odd}_{t,t}(2^{2/3} x, 2^{2/3} y; sigma).
struct TacnodeRelation {
    double scale;
    double t;
    double sigma;
};

/// From the s~ integral of F_0(x) F_0(y; -tau) rewritten in sigma~: scale 2^{2/3}, t = 2^{7/3} tau.
inline TacnodeRelation tacnode_relation(double s, double tau) { return {detail::c23, 4 * detail::c13 * tau, lax_sigma(s, tau)}; }

/// The constants as printed alongside the relation (2^{5/3}, t = 2^{4/3} tau).
inline TacnodeRelation tacnode_relation_printed(double s, double tau) { return {2 * detail::c23, 2 * detail::c13 * tau, lax_sigma(s, tau)}; }

}  // namespace wallbridge
