#pragma once

#include <chrono>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "dgop.hpp"
#include "finite_process.hpp"
#include "limit_kernels.hpp"
#include "mc_sim.hpp"
#include "painleve.hpp"
#include "quadrature.hpp"
#include "scaling_lab.hpp"
#include "schlesinger.hpp"
#include "specfun.hpp"

namespace wallbridge {

/// Outcome of one acceptance criterion: every measured quantity with its bound.
struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = true;
    double seconds = 0.0;
    std::vector<std::string> lines;
};

namespace verify {

/// Collects "name = value (bound)" entries; one failed comparison fails the criterion.
class Tally {
public:
    explicit Tally(CriterionResult& r) : r_(r) {}
    void below(const std::string& name, double value, double bound) { add(name, value, "<", bound, value < bound); }
    void above(const std::string& name, double value, double bound) { add(name, value, ">", bound, value > bound); }
    void truth(const std::string& name, bool ok) { add_line(name + (ok ? ": yes" : ": NO"), ok); }
    void note(const std::string& s) { r_.lines.push_back(s); }

private:
    void add(const std::string& name, double v, const char* op, double bound, bool ok) {
        std::ostringstream os;
        os.precision(4);
        os << name << " = " << v << " (" << op << " " << bound << ")";
        add_line(os.str(), ok);
    }
    void add_line(const std::string& s, bool ok) {
        r_.lines.push_back((ok ? "  " : "! ") + s);
        r_.pass = r_.pass && ok;
    }
    CriterionResult& r_;
};

/// Composite 24-point Gauss-Legendre on [a, b].
template <class F>
double integrate(F&& f, double a, double b, int panels = 64) {
    const auto& g = gauss_legendre(24);
    double s = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + (b - a) * p / panels, hi = a + (b - a) * (p + 1) / panels, m = (lo + hi) / 2, h = (hi - lo) / 2;
        for (std::size_t j = 0; j < g.x.size(); ++j) s += h * g.w[j] * f(m + h * g.x[j]);
    }
    return s;
}

/// Shared expensive state, built on first use.
struct Context {
    const HMTable& hm() {
        if (!hm_) hm_ = std::make_unique<HMTable>(hm_solve());
        return *hm_;
    }
    const TacnodeContext& tac() {
        if (!tac_) tac_ = std::make_unique<TacnodeContext>(hm());
        return *tac_;
    }

private:
    std::unique_ptr<HMTable> hm_;
    std::unique_ptr<TacnodeContext> tac_;
};

inline void orthogonality(Tally& t, Context&) {
    for (auto [n, T] : {std::pair{3, 6.0}, {4, 5.0}, {8, pi * pi}}) {
        const auto sys = build_system(n, T, 2 * n);
        // cross inner products summed directly over the lattice
        double worst = 0.0;
        for (int j = 0; j <= 2 * n; ++j)
            for (int k = 0; k < j; ++k) {
                double ip = 0.0;
                for (int m = -sys.lattice_cutoff; m <= sys.lattice_cutoff; ++m) {
                    const double s = double(m) / n;
                    ip += std::exp(-n * T * s * s / 2) / n * eval_p(sys, j, s) * eval_p(sys, k, s);
                }
                worst = std::max(worst, std::abs(ip) / std::sqrt(sys.h[j] * sys.h[k]));
            }
        t.below(detail::cat("(n, T) = (", n, ", ", T, "): max |<p_j, p_k>| / sqrt(h_j h_k)"), worst, 1e-10);
    }
    // p_k at (n, T) and (2n, 2T) on the halved lattice variable
    for (auto [n, T] : {std::pair{3, 6.0}, {4, 5.0}}) {
        const auto a = build_system(n, T, 2 * n), b = build_system(2 * n, 2 * T, 2 * n);
        double eh = 0.0, ep = 0.0;
        for (int k = 0; k <= 2 * n; ++k) {
            eh = std::max(eh, std::abs(a.h[k] / (std::pow(2.0, 2 * k + 1) * b.h[k]) - 1.0));
            for (double x : {0.3, 0.9, 1.7}) {
                const double pa = eval_p(a, k, x);
                ep = std::max(ep, std::abs(pa - std::pow(2.0, k) * eval_p(b, k, x / 2)) / std::max(1.0, std::abs(pa)));
            }
        }
        t.below(detail::cat("rescaling h_k (n = ", n, ")"), eh, 1e-10);
        t.below(detail::cat("rescaling p_k (n = ", n, ")"), ep, 1e-10);
    }
}

inline void transition(Tally& t, Context&) {
    using BC = BoundaryCondition;
    double dual = 0.0;
    for (BC bc : {BC::reflect, BC::absorb, BC::circle})
        for (int n : {1, 4, 16})
            for (double tt : {0.05, 0.3, 2.0, 9.0})
                for (double x : {0.1, 1.0, 2.9})
                    for (double y : {0.0, 0.5, 3.1}) {
                        const double a = trans_density_images(bc, x, y, tt, n), b = trans_density_fourier(bc, x, y, tt, n);
                        dual = std::max(dual, std::abs(a - b) / std::max(1.0, std::abs(a)));
                    }
    t.below("images vs Fourier", dual, 1e-12);
    double norm = 0.0, deficit = 1.0;
    for (double x : {0.2, 1.0, 2.8})
        for (double tt : {0.1, 0.5, 3.0}) {
            norm = std::max(norm, std::abs(integrate([&](double y) { return trans_density(BC::reflect, x, y, tt, 4); }, 0, pi) - 1.0));
            deficit = std::min(deficit, 1.0 - integrate([&](double y) { return trans_density(BC::absorb, x, y, tt, 4); }, 0, pi));
        }
    t.below("|reflect mass - 1|", norm, 1e-8);
    t.above("absorb mass deficit, smallest 1 - mass", deficit, 0.0);
    double ck = 0.0;
    for (BC bc : {BC::reflect, BC::absorb, BC::circle}) {
        const double lo = bc == BC::circle ? -pi : 0.0, x = 0.7, y = 2.2, t1 = 0.4, t2 = 0.9;
        const double lhs = integrate([&](double z) { return trans_density(bc, x, z, t1, 3) * trans_density(bc, z, y, t2, 3); }, lo, pi);
        ck = std::max(ck, std::abs(lhs - trans_density(bc, x, y, t1 + t2, 3)));
    }
    t.below("Chapman-Kolmogorov", ck, 1e-8);
}

inline void even_odd_of_circle(Tally& t, Context&) {
    using BC = BoundaryCondition;
    for (int n : {2, 3}) {
        const double T = 6.0;
        FiniteKernel R(BC::reflect, n, T), A(BC::absorb, n, T), C(BC::circle, 2 * n, 2 * T);
        double worst = 0.0;
        for (auto [ti, tj] : {std::pair{2.0, 2.5}, {3.5, 1.2}})
            for (int a = 0; a < 5; ++a)
                for (int b = 0; b < 5; ++b) {
                    const double x = 0.3 + 0.6 * a, y = 0.2 + 0.65 * b;
                    const double c1 = C(2 * ti, 2 * tj, x, y), c2 = C(2 * ti, 2 * tj, x, -y);
                    worst = std::max({worst, std::abs(R(ti, tj, x, y) - c1 - c2), std::abs(A(ti, tj, x, y) - c1 + c2)});
                }
        t.below(detail::cat("n = ", n, ": sup |K^ref/abs - (C +- C~)|"), worst, 1e-8);
    }
}

inline void pearcey_hard_edge(Tally& t, Context&) {
    const double c = std::pow(2.0, -1.5), r2 = std::sqrt(2.0);
    struct P {
        double s, t, xi, eta;
    };
    double we = 0.0, wo = 0.0;
    for (const P& p : {P{0.1, 0.4, 0.8, 1.2}, P{0.0, 0.0, 0.5, 0.7}, P{-0.3, 0.2, 1.1, 0.6}, P{0.4, -0.2, 0.3, 1.4}, P{0.2, 0.2, 1.5, 0.9}}) {
        const auto pe = pearcey_parity(Parity::even, p.s, p.t, p.xi, p.eta), po = pearcey_parity(Parity::odd, p.s, p.t, p.xi, p.eta);
        const double x = c * p.xi * p.xi, y = c * p.eta * p.eta;
        we = std::max(we, std::abs(pe.value - p.eta / r2 * hard_pearcey(-0.5, p.s / r2, p.t / r2, x, y).value));
        wo = std::max(wo, std::abs(po.value - p.xi / r2 * hard_pearcey(0.5, p.s / r2, p.t / r2, x, y).value));
    }
    t.below("even vs hard-edge alpha = -1/2", we, 1e-6);
    t.below("odd vs hard-edge alpha = +1/2", wo, 1e-6);
}

inline void painleve(Tally& t, Context& cx) {
    const auto& hm = cx.hm();
    double ai = 0.0;
    for (double s : {4.0, 5.0, 6.0, 8.0}) ai = std::max(ai, std::abs(hm.eval(0, s).q / airy_ai(s) - 1.0));
    t.below("q_0 / Ai - 1 on sigma >= 4", ai, 1e-5);
    t.below("|q_0(-8) / sqrt(4) - 1|", std::abs(hm.eval(0, -8.0).q / 2.0 - 1.0), 5e-3);
    t.below("PII residual nu = 0, 1", std::max(hm.pii_residual(0), hm.pii_residual(1)), 1e-8);
    double inv = 0.0, shift = 0.0;
    for (std::size_t i = 0; i < hm.sigma_grid.size(); i += 7) {
        const double s = hm.sigma_grid[i];
        if (std::abs(s) > 10.0) continue;
        for (int nu = 0; nu < 2; ++nu) {
            const double q = hm.q[nu][i], q1 = hm.q[nu + 1][i], q1p = hm.qp[nu + 1][i];
            inv = std::max(inv, std::abs(q + q1 - (2 * nu + 1) / (2 * q1 * q1 + 2 * q1p + s)));
            shift = std::max(shift, std::abs(hamiltonian_u(s, q1, q1p, nu + 1) - hamiltonian_u(s, q, hm.qp[nu][i], nu) - (q1 + q)));
        }
    }
    t.below("Baecklund inverse map", inv, 1e-8);
    t.below("Hamiltonian shift u_{nu+1} - u_nu = q_{nu+1} + q_nu", shift, 1e-8);
    double det = 0.0;
    for (double s : {-1.0, 0.0, 0.4, 2.0}) {
        const auto p = hm.eval(0, s);
        for (double x : {-3.0, -0.5, 0.0, 0.7, 2.5}) det = std::max(det, std::abs(det2(psi_real_axis(s, p.q, p.qp, x)) - 1.0));
    }
    t.below("|det Psi - 1|", det, 1e-10);
    const auto C = contour_sigma_T(3.5);
    const auto R = build_rule(C);
    const double s = 0.4, h = 1e-3;
    const auto P = psi_solve(s, hm, C, R);
    double mirror = 0.0;
    for (std::size_t i = 0; i < R.nodes.size(); ++i)
        for (std::size_t j = 0; j < R.nodes.size(); ++j)
            if (std::abs(R.nodes[i] + R.nodes[j]) < 1e-14) mirror = std::max({mirror, std::abs(P.f[j] + P.g[i]), std::abs(P.g[j] + P.f[i])});
    t.below("mirror symmetry f(-z) = -g(z)", mirror, 1e-8);
    std::vector<PsiSlice> st;
    for (int k : {-2, -1, 1, 2}) st.push_back(psi_solve(s + k * h, hm, C, R));
    double ds = 0.0;
    for (std::size_t i = 0; i < R.nodes.size(); ++i) {
        const cplx z = R.nodes[i];
        const cplx fs = (st[0].f[i] - 8.0 * st[1].f[i] + 8.0 * st[2].f[i] - st[3].f[i]) / (12 * h);
        const cplx gs = (st[0].g[i] - 8.0 * st[1].g[i] + 8.0 * st[2].g[i] - st[3].g[i]) / (12 * h);
        ds = std::max({ds, std::abs(fs - (-I * z * P.f[i] + P.q * P.g[i])), std::abs(gs - (P.q * P.f[i] + I * z * P.g[i]))});
    }
    t.below("s-derivative identities", ds, 1e-6);
}

inline void schlesinger(Tally& t, Context& cx) {
    const auto& hm = cx.hm();
    double worst = 0.0, ident = 0.0;
    for (int nu = 0; nu < 2; ++nu)
        for (double s : {-0.5, 0.4, 1.5})
            for (double tau : {-0.4, 0.0, 0.3})
                for (cplx z : {cplx(1, 0.5), cplx(0.3, -1.2), cplx(-2.0, 0.7)}) {
                    const auto c = schlesinger_residual(lax_point(nu, s, tau, hm), lax_point(nu + 1, s, tau, hm), z);
                    worst = std::max(worst, c.residual);
                    ident = std::max({ident, c.inverse, c.rdr, c.rd, c.beta_delta_gamma});
                }
    t.below("max ||Sigma U_nu Sigma + W - U_{nu+1}|| over 27 points, nu = 0, 1", worst, 1e-8);
    t.below("R^2, R D R, beta delta + gamma", ident, 1e-12);
    double zc = 0.0;
    for (int nu = 0; nu <= 2; ++nu)
        for (double s : {-0.3, 0.5})
            for (double tau : {0.0, 0.4})
                for (cplx z : {cplx(1, 0.5), cplx(-0.7, 2.0)}) zc = std::max(zc, zero_curvature_residual(nu, s, tau, z, hm));
    t.below("zero-curvature residual", zc, 1e-6);
}

inline void hard_tacnode_suite(Tally& t, Context& cx) {
    const auto& ctx = cx.tac();
    const double r23 = std::cbrt(4.0);
    struct P {
        double x, y, s, tau;
    };
    double rel = 0.0;
    for (const P& p : {P{0.6, 0.9, 0.5, 0.2}, P{0.3, 1.1, 0.0, -0.3}, P{1.0, 0.5, 1.0, 0.4}}) {
        const auto r = tacnode_relation(p.s, p.tau);
        for (int k = 0; k < 2; ++k) {
            const auto K = hard_tacnode(k - 0.5, p.x, p.y, p.s, p.tau, ctx);
            const auto Tv = tacnode_parity(ctx, k == 0 ? Parity::even : Parity::odd, r.t, r.t, r23 * p.x, r23 * p.y, r.sigma, true);
            rel = std::max(rel, std::abs(K.value - r.scale * Tv.value));
        }
    }
    t.below("hard-edge vs even/odd tacnode, 3 points x 2 relations", rel, 1e-4);
    double routes = 0.0;
    for (int k = 0; k < 2; ++k)
        for (auto [x, y] : {std::pair{0.6, 0.9}, {0.7, 0.7}}) {
            const auto K = hard_tacnode(k - 0.5, x, y, 0.5, 0.2, ctx);
            routes = std::max(routes, std::abs(K.value - K.route_b));
        }
    t.below("route A vs bilinear route B, k = 0, 1", routes, 1e-4);
    const double x = 0.6, y = 0.9, s = 0.5, tau = 0.2, h = 1e-3;
    const double d = (hard_tacnode_bilinear(0, x, y, s + h, tau, ctx).first - hard_tacnode_bilinear(0, x, y, s - h, tau, ctx).first).real() / (2 * h);
    const double r1 = (-F_k(0, x, s, tau, ctx).value * F_k(0, y, s, -tau, ctx).value / pi).real();
    t.below("d/ds bilinear vs rank one", std::abs(d - r1), 1e-4);
    bool mono = true;
    for (int k = 0; k < 2; ++k) {
        double prev = 1e300;
        for (double sv : {4.0, 5.0, 6.0, 7.0, 8.0}) {
            const double v = std::abs(hard_tacnode_bilinear(k, 0.6, 0.9, sv, 0.2, ctx).first.real());
            mono = mono && v < prev;
            prev = v;
        }
    }
    t.truth("decay monotone on s in [4, 8]", mono);
}

inline void triple_integral(Tally& t, Context& cx) {
    const auto& ctx = cx.tac();
    struct P {
        double s, t, xi, eta, sigma;
    };
    double worst = 0.0;
    for (const P& p : {P{0, 0, 0.4, 0.7, 0.5}, P{0.1, 0.1, 0.9, 0.3, 0.0}, P{-0.2, 0.2, 0.6, 1.0, 1.0}})
        for (Parity par : {Parity::even, Parity::odd}) {
            const auto direct = tacnode_parity(ctx, par, p.s, p.t, p.xi, p.eta, p.sigma, true);
            const auto tri = tacnode_triple(ctx, par, p.s, p.t, p.xi, p.eta, p.sigma, 0.0, true);
            worst = std::max(worst, std::abs(tri.value - direct.value));
        }
    t.below("triple integral vs direct K~ even/odd, 3 points", worst, 1e-4);
    const double h = 1e-3;
    double fd = 0.0;
    for (Parity par : {Parity::even, Parity::odd}) {
        const double kp = tacnode_parity(ctx, par, 0, 0, 0.4, 0.7, 0.5 + h, true).value;
        const double km = tacnode_parity(ctx, par, 0, 0, 0.4, 0.7, 0.5 - h, true).value;
        const double sign = par == Parity::even ? -1.0 : 1.0;
        const double r1 = sign * (tacnode_rank_one(ctx, par, 0, 0, 0.4, 0.7, 0.5).first / (4 * pi * pi)).real();
        fd = std::max(fd, std::abs((kp - km) / (2 * h) - r1));
    }
    t.below("d/dsigma K~ vs rank-one integrand", fd, 1e-4);
}

inline void convergence(Tally& t, Context& cx) {
    for (auto c : {ConvergeCase::tac_reflect, ConvergeCase::tac_absorb}) {
        const auto r = converge_check(c, {16, 32, 64}, default_grid(), 0.0, {}, &cx.tac());
        std::ostringstream os;
        os.precision(4);
        for (const auto& row : r.rows) os << " n=" << row.n << ":" << row.sup_error;
        t.truth(std::string(to_string(c)) + " strictly decreasing," + os.str(), r.strictly_decreasing());
    }
    // Pearcey only with a calibrated scale
    const auto p = converge_check(ConvergeCase::pearcey_absorb, {16, 32, 64}, default_grid(), 6.0);
    std::ostringstream os;
    os.precision(4);
    os << "pearcey_absorb at T = 6 with calibrated d = " << p.d << ":";
    for (const auto& row : p.rows) os << " n=" << row.n << ":" << row.sup_error;
    t.note("  " + os.str());
}

/// Histogram z-scores against a density averaged over each bin, with the error per
/// bin the empirical one or, when larger, the binomial one from the density.
inline double worst_z(const Histogram& h, std::size_t S, const std::function<double(double)>& rho) {
    double worst = 0.0;
    const double w = h.width();
    for (std::size_t b = 0; b < h.density.size(); ++b) {
        const double lo = h.lo + b * w, expect = integrate(rho, lo, lo + w, 4) / w, q = expect * w;
        const double se = std::max(h.stderr_[b], std::sqrt(std::max(q * (1 - q), 0.0) / S) / w);
        worst = std::max(worst, std::abs(h.density[b] - expect) / se);
    }
    return worst;
}

inline void monte_carlo(Tally& t, Context&, std::size_t samples) {
    using BC = BoundaryCondition;
    const double T = 4.0;
    const auto one = sample_paths(BC::reflect, 1, T, 50, default_eps(1), samples, 7);
    double z1 = 0.0;
    for (int k : {10, 25, 40}) {
        const double tk = one.time(k), a = one.eps;
        auto rho = [&](double x) {
            return trans_density_fourier(BC::reflect, a, x, tk, 1) * trans_density_fourier(BC::reflect, x, a, T - tk, 1) /
                   trans_density_fourier(BC::reflect, a, a, T, 1);
        };
        z1 = std::max(z1, worst_z(slice_histogram(one, k, 20), one.samples, rho));
    }
    t.below(detail::cat("n = 1 reflect vs exact bridge density, worst |z| over 20 bins x 3 slices, ", samples, " samples"), z1, 3.0);
    const auto two = sample_paths(BC::absorb, 2, T, 50, default_eps(2), samples, 11, SamplerMethod::skeleton);
    const FiniteKernel K(BC::absorb, 2, T);
    const double z2 = worst_z(slice_histogram(two, 25, 20), two.samples, [&](double x) { return K(T / 2, T / 2, x, x); });
    t.below(detail::cat("n = 2 absorb at T/2 vs kernel density, worst |z| over 20 bins, ", samples, " samples"), z2, 3.0);
    const auto a = sample_paths(BC::absorb, 2, 0.5, 50, default_eps(2), 200, 3), b = sample_paths(BC::absorb, 2, 0.5, 50, default_eps(2), 200, 3);
    t.truth("seeded rejection runs byte-identical",
            a.paths.size() == b.paths.size() && std::memcmp(a.paths.data(), b.paths.data(), a.paths.size() * sizeof(float)) == 0);
    const auto c = sample_paths(BC::absorb, 2, T, 50, default_eps(2), 200, 3, SamplerMethod::skeleton),
               d = sample_paths(BC::absorb, 2, T, 50, default_eps(2), 200, 3, SamplerMethod::skeleton);
    t.truth("seeded skeleton runs byte-identical", c.paths == d.paths);
}

struct Criterion {
    int id;
    std::string title;
    std::function<void(Tally&, Context&)> run;
};

inline std::vector<Criterion> criteria(bool fast) {
    const std::size_t mc = fast ? 2000 : 100000;
    return {
        {1, "orthogonality of the discrete Gaussian polynomials", orthogonality},
        {2, "transition densities", transition},
        {3, "reflect/absorb kernels as even/odd parts of the circle kernel", even_odd_of_circle},
        {4, "even/odd Pearcey vs hard-edge Pearcey", pearcey_hard_edge},
        {5, "Painleve II and the Flaschka-Newell matrix", painleve},
        {6, "Schlesinger transformation", schlesinger},
        {7, "hard-edge tacnode", hard_tacnode_suite},
        {8, "triple-integral form of the tacnode kernels", triple_integral},
        {9, "convergence of the finite kernels to the tacnode limits", convergence},
        {10, "Monte Carlo validation", [mc](Tally& t, Context& c) { monte_carlo(t, c, mc); }},
    };
}

/// Runs the selected criteria in order; exceptions count as failures.
inline std::vector<CriterionResult> run(const std::vector<int>& ids, bool fast, const std::function<void(const CriterionResult&)>& report = {}) {
    Context cx;
    std::vector<CriterionResult> out;
    for (const auto& c : criteria(fast)) {
        if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
        CriterionResult r;
        r.id = c.id;
        r.title = c.title;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            Tally t(r);
            c.run(t, cx);
        } catch (const std::exception& e) {
            r.pass = false;
            r.lines.push_back(std::string("! exception: ") + e.what());
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (report) report(r);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace verify
}  // namespace wallbridge
