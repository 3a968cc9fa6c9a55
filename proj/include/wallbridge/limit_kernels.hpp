#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "painleve.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

namespace wallbridge {

struct KernelValue {
    std::string kernel_id;
    double value = 0.0;
    double err = 0.0;
    double imag = 0.0;  ///< imaginary part of the internally complex result
};

enum class Parity { even, odd };

inline const char* to_string(Parity p) { return p == Parity::even ? "even" : "odd"; }

inline Parity parse_parity(const std::string& s) {
    if (s == "even") return Parity::even;
    if (s == "odd") return Parity::odd;
    throw DomainError("unknown parity '" + s + "' (even, odd)");
}

/// Heat kernel phi_{s,t}(xi, eta) for s < t.
inline double phi(double s, double t, double xi, double eta) {
    if (!(t > s)) throw DomainError(detail::cat("phi: needs s < t, got (", s, ", ", t, ")"));
    const double d = t - s;
    return std::exp(-(xi - eta) * (xi - eta) / (2 * d)) / std::sqrt(2 * pi * d);
}

/// Bessel-process transition density phi^{(alpha)}_{s,t}(x, y) for s < t.
inline double phi_alpha(double alpha, double s, double t, double x, double y) {
    if (!(t > s)) throw DomainError(detail::cat("phi_alpha: needs s < t, got (", s, ", ", t, ")"));
    if (!(x > 0 && y > 0)) throw DomainError("phi_alpha: x, y must be positive");
    const double d = t - s, z = 2 * std::sqrt(x * y) / d;
    const double gap = (std::sqrt(x) - std::sqrt(y)) * (std::sqrt(x) - std::sqrt(y)) / d;
    return std::pow(y / x, alpha / 2) / d * std::exp(-gap) * bessel_i_scaled(alpha, z);
}

namespace detail {

struct DoubleSum {
    cplx value;
    double err;
};

/// sum_i sum_j a_i b_j k(z_i, w_j) on the 24-point rules and on the 12-point
/// companions; a and b already carry the quadrature weights.
template <class Kf>
DoubleSum double_sum(const std::vector<cplx>& z, const std::vector<cplx>& a, const std::vector<cplx>& w, const std::vector<cplx>& b,
                     const std::vector<cplx>& zc, const std::vector<cplx>& ac, const std::vector<cplx>& wc, const std::vector<cplx>& bc,
                     Kf&& k) {
    cplx fine = 0.0, coarse = 0.0;
    double mass = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        cplx row = 0.0;
        double rm = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            const cplx v = b[j] * k(z[i], w[j], i, j, false);
            row += v;
            rm += std::abs(v);
        }
        fine += a[i] * row;
        mass += std::abs(a[i]) * rm;
    }
    for (std::size_t i = 0; i < zc.size(); ++i) {
        cplx row = 0.0;
        for (std::size_t j = 0; j < wc.size(); ++j) row += bc[j] * k(zc[i], wc[j], i, j, true);
        coarse += ac[i] * row;
    }
    if (!std::isfinite(fine.real()) || !std::isfinite(fine.imag())) throw ConvergenceError("double_sum: non-finite quadrature sum");
    return {fine, std::abs(fine - coarse) + 4e-16 * mass};
}

template <class F>
void weighted(const QuadratureRule& r, F&& f, std::vector<cplx>& a, std::vector<cplx>& ac) {
    a.resize(r.nodes.size());
    ac.resize(r.check_nodes.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = r.weights[i] * f(r.nodes[i]);
    for (std::size_t i = 0; i < ac.size(); ++i) ac[i] = r.check_weights[i] * f(r.check_nodes[i]);
}

inline PanelOptions pearcey_panels() {
    PanelOptions p;
    p.panels_per_ray = 6;
    p.min_scale = 1e-10;
    return p;
}

/// Truncation radii for the Pearcey pair (z on X, w on R).
inline std::pair<double, double> pearcey_radii(double s, double t, double xi) {
    const double Rz = decay_radius([&](double r) { return -r * r * r * r / 4 + std::abs(s) * r * r / 2 + std::abs(xi) * r; }, 1e-17);
    const double Rw = decay_radius([&](double r) { return -r * r * r * r / 4 - t * r * r / 2; }, 1e-17);
    return {std::max(Rz, 1.0), std::max(Rw, 1.0)};
}

}  // namespace detail

/// K-tilde Pearcey as the raw complex double integral.
inline detail::DoubleSum pearcey_tilde(double s, double t, double xi, double eta) {
    const auto [Rz, Rw] = detail::pearcey_radii(s, t, xi);
    const auto X = build_rule(contour_X(Rz), detail::pearcey_panels());
    const auto Rl = build_rule(contour_real_line(Rw), detail::pearcey_panels());
    std::vector<cplx> a, ac, b, bc;
    detail::weighted(X, [&](cplx z) { return std::exp(z * z * z * z / 4.0 + s * z * z / 2.0 + I * xi * z); }, a, ac);
    detail::weighted(Rl, [&](cplx w) { return std::exp(-w * w * w * w / 4.0 - t * w * w / 2.0 - I * eta * w); }, b, bc);
    auto r = detail::double_sum(X.nodes, a, Rl.nodes, b, X.check_nodes, ac, Rl.check_nodes, bc,
                                [](cplx z, cplx w, std::size_t, std::size_t, bool) { return 1.0 / (z - w); });
    const cplx pre = I / ((2.0 * pi * I) * (2.0 * pi * I));
    return {pre * r.value, std::abs(pre) * r.err};
}

/// Extended Pearcey kernel K_{s,t}(xi, eta).
inline KernelValue pearcey(double s, double t, double xi, double eta) {
    const auto k = pearcey_tilde(s, t, xi, eta);
    const double sub = s < t ? phi(s, t, xi, eta) : 0.0;
    return {"pearcey", k.value.real() - sub, k.err, k.value.imag()};
}

/// Even/odd Pearcey straight from the cos/sin double integrals. Even:
/// (1/(2 pi^2 i)) z cos(xi z) cos(eta w)/(z^2 - w^2). Odd: -(i/(2 pi^2)) w sin(xi z)
/// sin(eta w)/(z^2 - w^2); a factor z there would make the X integrand even in z,
/// and even integrands cancel on X.
inline KernelValue pearcey_parity_direct(Parity p, double s, double t, double xi, double eta) {
    const auto [Rz, Rw] = detail::pearcey_radii(s, t, xi);
    const auto X = build_rule(contour_X(Rz), detail::pearcey_panels());
    const auto Rl = build_rule(contour_real_line(Rw), detail::pearcey_panels());
    const bool even = p == Parity::even;
    std::vector<cplx> a, ac, b, bc;
    detail::weighted(X, [&](cplx z) { return std::exp(z * z * z * z / 4.0 + s * z * z / 2.0) * (even ? z * std::cos(xi * z) : std::sin(xi * z)); }, a, ac);
    detail::weighted(Rl, [&](cplx w) { return std::exp(-w * w * w * w / 4.0 - t * w * w / 2.0) * (even ? std::cos(eta * w) : w * std::sin(eta * w)); }, b, bc);
    auto r = detail::double_sum(X.nodes, a, Rl.nodes, b, X.check_nodes, ac, Rl.check_nodes, bc,
                                [](cplx z, cplx w, std::size_t, std::size_t, bool) { return 1.0 / (z * z - w * w); });
    const cplx pre = even ? 1.0 / (2.0 * pi * pi * I) : -I / (2.0 * pi * pi);
    const cplx v = pre * r.value;
    double sub = 0.0;
    if (s < t) sub = even ? phi(s, t, xi, eta) + phi(s, t, xi, -eta) : phi(s, t, xi, eta) - phi(s, t, xi, -eta);
    return {even ? "pearcey_even" : "pearcey_odd", v.real() - sub, std::abs(pre) * r.err, v.imag()};
}

/// Even/odd Pearcey: the direct form, cross-checked against K(xi, eta) +- K(xi, -eta).
inline KernelValue pearcey_parity(Parity p, double s, double t, double xi, double eta, bool cross_check = true) {
    auto B = pearcey_parity_direct(p, s, t, xi, eta);
    if (cross_check) {
        const auto k1 = pearcey(s, t, xi, eta), k2 = pearcey(s, t, xi, -eta);
        const double A = p == Parity::even ? k1.value + k2.value : k1.value - k2.value;
        const double tol = B.err + k1.err + k2.err;
        if (std::abs(A - B.value) > tol)
            throw ConsistencyError(detail::cat("pearcey_parity: representations differ by ", std::abs(A - B.value), " > combined err ", tol));
    }
    return B;
}

// ---------------------------------------------------------------------------
// Hard-edge Pearcey
// ---------------------------------------------------------------------------

namespace detail {

inline std::pair<double, double> hard_pearcey_radii(double s, double t, double x, double y) {
    const double Rv = decay_radius([&](double r) { return -r * r * r * r / 2 + std::abs(s) * r * r + 2 * std::sqrt(x) * r; }, 1e-17);
    const double Ru = decay_radius([&](double r) { return -r * r * r * r / 2 - t * r * r + 2 * std::sqrt(y) * r; }, 1e-17);
    return {std::max(Rv, 1.0), std::max(Ru, 1.0)};
}

inline void check_hard(double alpha, double x, double y) {
    if (!(alpha > -1)) throw DomainError(detail::cat("hard_pearcey: alpha = ", alpha, " must exceed -1"));
    if (!(x > 0 && y > 0)) throw DomainError(detail::cat("hard_pearcey: x, y = ", x, ", ", y, " must be positive"));
}

}  // namespace detail

/// Hard-edge Pearcey kernel K^{(alpha)}_{s,t}(x, y). The Bessel factors are
/// rewritten through the entire function (z/2)^{-alpha} J_alpha(z), so the
/// (y/x)^{alpha/2} (u/v)^alpha prefactor collapses to y^alpha u^{2 alpha}.
inline KernelValue hard_pearcey(double alpha, double s, double t, double x, double y) {
    detail::check_hard(alpha, x, y);
    const auto [Rv, Ru] = detail::hard_pearcey_radii(s, t, x, y);
    const auto C = build_rule(contour_C(Rv), detail::pearcey_panels());
    const auto H = build_rule(contour_half_line(Ru), detail::pearcey_panels());
    const double sx = std::sqrt(x), sy = std::sqrt(y);
    std::vector<cplx> a, ac, b, bc;
    detail::weighted(C, [&](cplx v) { return std::exp(v * v * v * v / 2.0 + s * v * v) * v * bessel_j_reduced(alpha, 2.0 * sx * v); }, a, ac);
    detail::weighted(H, [&](cplx u) {
        const double ur = u.real();
        return std::exp(-u * u * u * u / 2.0 - t * u * u) * std::pow(ur, 2 * alpha + 1) * bessel_j_reduced(alpha, 2.0 * sy * u);
    }, b, bc);
    auto r = detail::double_sum(C.nodes, a, H.nodes, b, C.check_nodes, ac, H.check_nodes, bc,
                                [](cplx v, cplx u, std::size_t, std::size_t, bool) { return 1.0 / (v * v - u * u); });
    const cplx pre = 2.0 / (pi * I) * std::pow(y, alpha);
    const cplx k = pre * r.value;
    const double sub = s < t ? phi_alpha(alpha, s, t, x, y) : 0.0;
    return {detail::cat("hard_pearcey(", alpha, ")"), k.real() - sub, std::abs(pre) * r.err, k.imag()};
}

/// alpha = +-1/2 through the elementary sin/cos forms.
inline KernelValue hard_pearcey_reduced(double alpha, double s, double t, double x, double y) {
    detail::check_hard(alpha, x, y);
    const bool plus = alpha == 0.5;
    if (!plus && alpha != -0.5) throw DomainError("hard_pearcey_reduced: alpha must be +1/2 or -1/2");
    const auto [Rv, Ru] = detail::hard_pearcey_radii(s, t, x, y);
    const auto C = build_rule(contour_C(Rv), detail::pearcey_panels());
    const auto H = build_rule(contour_half_line(Ru), detail::pearcey_panels());
    const double sx = std::sqrt(x), sy = std::sqrt(y);
    std::vector<cplx> a, ac, b, bc;
    detail::weighted(C, [&](cplx v) { return std::exp(v * v * v * v / 2.0 + s * v * v) * (plus ? std::sin(2.0 * sx * v) : v * std::cos(2.0 * sx * v)); }, a, ac);
    detail::weighted(H, [&](cplx u) { return std::exp(-u * u * u * u / 2.0 - t * u * u) * (plus ? u * std::sin(2.0 * sy * u) : std::cos(2.0 * sy * u)); }, b, bc);
    auto r = detail::double_sum(C.nodes, a, H.nodes, b, C.check_nodes, ac, H.check_nodes, bc,
                                [](cplx v, cplx u, std::size_t, std::size_t, bool) { return 1.0 / (v * v - u * u); });
    const cplx pre = 2.0 / (pi * pi * I) / (plus ? sx : sy);
    const cplx k = pre * r.value;
    double sub = 0.0;
    if (s < t) {
        const double d = t - s, em = std::exp(-(sx - sy) * (sx - sy) / d), ep = std::exp(-(sx + sy) * (sx + sy) / d);
        sub = (plus ? (em - ep) / sx : (em + ep) / sy) / (2 * std::sqrt(pi * d));
    }
    return {detail::cat("hard_pearcey_reduced(", alpha, ")"), k.real() - sub, std::abs(pre) * r.err, k.imag()};
}

// ---------------------------------------------------------------------------
// Tacnode
// ---------------------------------------------------------------------------

struct TacnodeOptions {
    double R = 4.0;             ///< truncation of every Sigma_T ray
    double apex_height = 0.5;   ///< the wedges start at +-i h
    int panels_per_ray = 6;
    double diagonal_threshold = 1e-8;
    PsiOptions psi;
};

/// Immutable HM data plus a Sigma_T rule; caches f, g slices per PII parameter.
class TacnodeContext {
public:
    explicit TacnodeContext(const HMTable& hm, TacnodeOptions opt = {}) : hm_(hm), opt_(opt) {
        contour_ = contour_sigma_T(opt.R, opt.apex_height);
        PanelOptions p;
        p.panels_per_ray = opt.panels_per_ray;
        rule_ = build_rule(contour_, p);
    }

    const HMTable& hm() const { return hm_; }
    const ContourSpec& contour() const { return contour_; }
    const QuadratureRule& rule() const { return rule_; }
    const TacnodeOptions& options() const { return opt_; }

    const PsiSlice& slice(double sigma) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(sigma);
        if (it != cache_.end()) return it->second;
        return cache_.emplace(sigma, psi_solve(sigma, hm_, contour_, rule_, opt_.psi)).first->second;
    }

    /// Radius the integrand bound needs at these parameters; must not exceed R.
    double required_radius(double s, double t, double xi, double eta, double sigma) const {
        auto bound = [&](double r) {
            double worst = -1e300;
            for (const auto& ray : contour_.rays) {
                const cplx u = ray.origin + ray.direction * r;
                const double decay = -std::abs(fn_theta(u, sigma).imag());
                const double gauss = std::max((s * u * u / 2.0).real(), (-t * u * u / 2.0).real());
                worst = std::max(worst, decay + gauss + std::max(std::abs(xi), std::abs(eta)) * std::abs(u.imag()));
            }
            return worst;
        };
        return decay_radius(bound, 1e-17, 50.0);
    }

    void check_radius(double s, double t, double xi, double eta, double sigma) const {
        const double need = required_radius(s, t, xi, eta, sigma);
        if (need > opt_.R)
            throw DomainError(detail::cat("tacnode: parameters need Sigma_T radius ", need, " > configured ", opt_.R));
    }

private:
    const HMTable& hm_;
    TacnodeOptions opt_;
    ContourSpec contour_;
    QuadratureRule rule_;
    mutable std::mutex mu_;
    mutable std::map<double, PsiSlice> cache_;
};

namespace detail {

/// (1/2 pi) sum sum e(u) e'(v) (f(u) g(v) - g(u) f(v)) / (2 pi i (u - v)) with
/// e'(v) = e^{-t v^2/2} w(v); removable diagonal by its limit g f' - f g'.
template <class WFun>
DoubleSum tacnode_bilinear(const TacnodeContext& ctx, const PsiSlice& P, double s, double t, double xi, WFun&& wv) {
    const auto& r = ctx.rule();
    const double thr = ctx.options().diagonal_threshold;
    std::vector<cplx> a(r.nodes.size()), b(r.nodes.size()), ac(r.check_nodes.size()), bc(r.check_nodes.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const cplx u = r.nodes[i];
        a[i] = r.weights[i] * std::exp(s * u * u / 2.0 - I * u * xi);
        b[i] = r.weights[i] * std::exp(-t * u * u / 2.0) * wv(u);
    }
    for (std::size_t i = 0; i < ac.size(); ++i) {
        const cplx u = r.check_nodes[i];
        ac[i] = r.check_weights[i] * std::exp(s * u * u / 2.0 - I * u * xi);
        bc[i] = r.check_weights[i] * std::exp(-t * u * u / 2.0) * wv(u);
    }
    auto kern = [&](cplx u, cplx v, std::size_t i, std::size_t j, bool check) -> cplx {
        const auto& f = check ? P.fc : P.f;
        const auto& g = check ? P.gc : P.g;
        if (std::abs(u - v) < thr) {
            const auto& fp = check ? P.fpc : P.fp;
            const auto& gp = check ? P.gpc : P.gp;
            return (g[i] * fp[i] - f[i] * gp[i]) / (2.0 * pi * I);
        }
        return (f[i] * g[j] - g[i] * f[j]) / (2.0 * pi * I * (u - v));
    };
    auto d = double_sum(r.nodes, a, r.nodes, b, r.check_nodes, ac, r.check_nodes, bc, kern);
    return {d.value / (2 * pi), d.err / (2 * pi)};
}

inline double parity_phi(Parity p, double s, double t, double xi, double eta) {
    if (!(s < t)) return 0.0;
    return p == Parity::even ? phi(s, t, xi, eta) + phi(s, t, xi, -eta) : phi(s, t, xi, eta) - phi(s, t, xi, -eta);
}

}  // namespace detail

/// Extended tacnode kernel K^{tac}_{s,t}(xi, eta; sigma) = K-tilde - 1_{s<t} phi.
inline KernelValue tacnode(const TacnodeContext& ctx, double s, double t, double xi, double eta, double sigma, bool tilde_only = false) {
    ctx.check_radius(s, t, xi, eta, sigma);
    const auto& P = ctx.slice(sigma);
    const auto d = detail::tacnode_bilinear(ctx, P, s, t, xi, [&](cplx v) { return std::exp(I * v * eta); });
    const double sub = (!tilde_only && s < t) ? phi(s, t, xi, eta) : 0.0;
    return {"tacnode", d.value.real() - sub, d.err, d.value.imag()};
}

/// Even/odd tacnode from the cos/sin double integrals (with the factor 2 that
/// K(xi, eta) +- K(xi, -eta) produces), cross-checked against that sum.
inline KernelValue tacnode_parity(const TacnodeContext& ctx, Parity p, double s, double t, double xi, double eta, double sigma,
                                  bool tilde_only = false, bool cross_check = true) {
    ctx.check_radius(s, t, xi, eta, sigma);
    const auto& P = ctx.slice(sigma);
    const bool even = p == Parity::even;
    // odd: (1/2pi) (fg - gf)/(2 pi (u - v)) 2 sin(v eta) = (1/2pi) (fg - gf)/(2 pi i (u - v)) 2i sin(v eta)
    const auto d = detail::tacnode_bilinear(ctx, P, s, t, xi, [&](cplx v) { return even ? 2.0 * std::cos(v * eta) : 2.0 * I * std::sin(v * eta); });
    const double sub = tilde_only ? 0.0 : detail::parity_phi(p, s, t, xi, eta);
    KernelValue out{even ? "tacnode_even" : "tacnode_odd", d.value.real() - sub, d.err, d.value.imag()};
    if (cross_check) {
        const auto k1 = tacnode(ctx, s, t, xi, eta, sigma, true), k2 = tacnode(ctx, s, t, xi, -eta, sigma, true);
        const double A = even ? k1.value + k2.value : k1.value - k2.value;
        const double tol = out.err + k1.err + k2.err + 1e-13;
        if (std::abs(A - (out.value + sub)) > tol)
            throw ConsistencyError(detail::cat("tacnode_parity: representations differ by ", std::abs(A - out.value - sub), " > ", tol));
    }
    return out;
}

/// Even tacnode through the symmetrised (u^2 - v^2) bracket, prefactor 1/(2 pi).
inline KernelValue tacnode_even_symmetric(const TacnodeContext& ctx, double s, double t, double xi, double eta, double sigma) {
    ctx.check_radius(s, t, xi, eta, sigma);
    const auto& P = ctx.slice(sigma);
    const auto& r = ctx.rule();
    const double thr = ctx.options().diagonal_threshold;
    std::vector<cplx> a(r.nodes.size()), b(r.nodes.size()), ac(r.check_nodes.size()), bc(r.check_nodes.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const cplx u = r.nodes[i];
        a[i] = r.weights[i] * std::exp(s * u * u / 2.0 - I * u * xi);
        b[i] = r.weights[i] * std::exp(-t * u * u / 2.0 + I * u * eta);
    }
    for (std::size_t i = 0; i < ac.size(); ++i) {
        const cplx u = r.check_nodes[i];
        ac[i] = r.check_weights[i] * std::exp(s * u * u / 2.0 - I * u * xi);
        bc[i] = r.check_weights[i] * std::exp(-t * u * u / 2.0 + I * u * eta);
    }
    auto kern = [&](cplx u, cplx v, std::size_t i, std::size_t j, bool check) -> cplx {
        const auto& f = check ? P.fc : P.f;
        const auto& g = check ? P.gc : P.g;
        const auto& fp = check ? P.fpc : P.fp;
        const auto& gp = check ? P.gpc : P.gp;
        cplx val = 0.0;
        val += std::abs(u - v) < thr ? (g[i] * fp[i] - f[i] * gp[i]) : (f[i] * g[j] - g[i] * f[j]) / (u - v);
        // u + v = 0 pairs a node with its mirror; f(-u) = -g(u) makes the numerator vanish there
        val += std::abs(u + v) < thr ? (f[i] * gp[i] - g[i] * fp[i]) : (f[i] * f[j] - g[i] * g[j]) / (u + v);
        return val / (2.0 * pi * I);
    };
    auto d = detail::double_sum(r.nodes, a, r.nodes, b, r.check_nodes, ac, r.check_nodes, bc, kern);
    return {"tacnode_even_symmetric", (d.value / (2 * pi)).real(), d.err / (2 * pi), (d.value / (2 * pi)).imag()};
}

/// A(sigma) B(sigma) with A = int e^{s u^2/2 - i u xi} (f +- g)(u) du,
/// B = int e^{-t v^2/2 + i v eta} (f +- g)(v) dv. The rank-one density of the
/// triple integral.
inline std::pair<cplx, double> tacnode_rank_one(const TacnodeContext& ctx, Parity p, double s, double t, double xi, double eta, double sigma) {
    const auto& P = ctx.slice(sigma);
    const auto& r = ctx.rule();
    const double sg = p == Parity::even ? 1.0 : -1.0;
    cplx A = 0.0, B = 0.0, Ac = 0.0, Bc = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const cplx u = r.nodes[i], h = P.f[i] + sg * P.g[i];
        A += r.weights[i] * std::exp(s * u * u / 2.0 - I * u * xi) * h;
        B += r.weights[i] * std::exp(-t * u * u / 2.0 + I * u * eta) * h;
    }
    for (std::size_t i = 0; i < r.check_nodes.size(); ++i) {
        const cplx u = r.check_nodes[i], h = P.fc[i] + sg * P.gc[i];
        Ac += r.check_weights[i] * std::exp(s * u * u / 2.0 - I * u * xi) * h;
        Bc += r.check_weights[i] * std::exp(-t * u * u / 2.0 + I * u * eta) * h;
    }
    return {A * B, std::abs(A * B - Ac * Bc)};
}

/// Triple integral +-(1/4 pi^2) int_sigma^sigma_max dsigma~ A B, Gauss-Legendre
/// panels of width <= 2 in sigma~. sigma_max <= sigma picks max(sigma + 6, 8).
/// The odd sign is negative: d/dsigma of the odd bracket is +(f-g)(u)(f-g)(v)/(2 pi).
inline KernelValue tacnode_triple(const TacnodeContext& ctx, Parity p, double s, double t, double xi, double eta, double sigma,
                                  double sigma_max = 0.0, bool tilde_only = false) {
    if (sigma_max <= sigma) sigma_max = std::max(sigma + 6.0, 8.0);
    ctx.check_radius(s, t, xi, eta, sigma);
    const auto& g24 = gauss_legendre(24);
    const auto& g12 = gauss_legendre(12);
    const int panels = std::max(1, int(std::ceil((sigma_max - sigma) / 2.0)));
    cplx fine = 0.0, coarse = 0.0;
    double inner = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double a = sigma + (sigma_max - sigma) * k / panels, b = sigma + (sigma_max - sigma) * (k + 1) / panels;
        const double mid = (a + b) / 2, half = (b - a) / 2;
        for (std::size_t j = 0; j < g24.x.size(); ++j) {
            const auto [v, e] = tacnode_rank_one(ctx, p, s, t, xi, eta, mid + half * g24.x[j]);
            fine += half * g24.w[j] * v;
            inner += half * g24.w[j] * e;
        }
        for (std::size_t j = 0; j < g12.x.size(); ++j) coarse += half * g12.w[j] * tacnode_rank_one(ctx, p, s, t, xi, eta, mid + half * g12.x[j]).first;
    }
    // tail: the integrand at sigma_max times a unit length bounds what is left
    const double tail = std::abs(tacnode_rank_one(ctx, p, s, t, xi, eta, sigma_max).first);
    const double c = (p == Parity::even ? 1.0 : -1.0) / (4 * pi * pi);
    const cplx v = c * fine;
    const double sub = tilde_only ? 0.0 : detail::parity_phi(p, s, t, xi, eta);
    return {p == Parity::even ? "tacnode_triple_even" : "tacnode_triple_odd", v.real() - sub, std::abs(c) * (std::abs(fine - coarse) + inner + tail), v.imag()};
}

}  // namespace wallbridge
