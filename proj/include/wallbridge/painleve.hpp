#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "core.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

namespace wallbridge {

// ---------------------------------------------------------------------------
// Hastings-McLeod solutions of q'' = 2q^3 + sigma q - nu
// ---------------------------------------------------------------------------

struct HMPoint {
    double q, qp, u;
};

namespace detail {

/// Finite-difference weights for the m-th derivative at x0 from nodes x (Fornberg).
inline std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m) {
    const int n = int(x.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][m];
    return w;
}

/// First derivative on a uniform grid: 7-point stencils, centred where possible.
inline std::vector<double> derivative7(const std::vector<double>& y, double h) {
    const int N = int(y.size());
    std::vector<double> d(N);
    for (int i = 0; i < N; ++i) {
        const int lo = std::clamp(i - 3, 0, N - 7);
        std::vector<double> x(7);
        for (int k = 0; k < 7; ++k) x[k] = (lo + k - i) * h;
        const auto w = fd_weights(0.0, x, 1);
        double s = 0.0;
        for (int k = 0; k < 7; ++k) s += w[k] * y[lo + k];
        d[i] = s;
    }
    return d;
}

/// Quintic Hermite interpolation on [0, h] from value, first and second derivative at both ends.
inline double hermite5(double t, double h, double y0, double d0, double s0, double y1, double d1, double s1) {
    const double x = t / h, x2 = x * x, x3 = x2 * x, x4 = x3 * x, x5 = x4 * x;
    const double h00 = 1 - 10 * x3 + 15 * x4 - 6 * x5, h01 = 10 * x3 - 15 * x4 + 6 * x5;
    const double h10 = x - 6 * x3 + 8 * x4 - 3 * x5, h11 = -4 * x3 + 7 * x4 - 3 * x5;
    const double h20 = 0.5 * (x2 - 3 * x3 + 3 * x4 - x5), h21 = 0.5 * (x3 - 2 * x4 + x5);
    return h00 * y0 + h01 * y1 + h * (h10 * d0 + h11 * d1) + h * h * (h20 * s0 + h21 * s1);
}

}  // namespace detail

inline double pii_rhs(double sigma, double q, double nu) { return 2 * q * q * q + sigma * q - nu; }

/// u = q'^2 - sigma q^2 - q^4 + 2 nu q.
inline double hamiltonian_u(double sigma, double q, double qp, double nu) {
    return qp * qp - sigma * q * q - q * q * q * q + 2 * nu * q;
}

/// One Baecklund step (q_nu, q_nu', u_nu) -> (q_{nu+1}, q_{nu+1}', u_{nu+1}).
inline HMPoint backlund_step(double sigma, const HMPoint& p, double nu) {
    const double q = p.q, qp = p.qp, qpp = pii_rhs(sigma, q, nu);
    const double D = 2 * q * q - 2 * qp + sigma;
    if (std::abs(D) < 1e-13) throw ConvergenceError(detail::cat("backlund_step: pole at sigma = ", sigma, " (2q^2 - 2q' + sigma vanishes)"));
    const double Dp = 4 * q * qp - 2 * qpp + 1;
    const double q1 = -q + (2 * nu + 1) / D;
    const double q1p = -qp - (2 * nu + 1) * Dp / (D * D);
    return {q1, q1p, p.u + q1 + q};
}

/// Hastings-McLeod asymptotics for nu = 0 outside the tabulated window.
inline HMPoint hm0_asymptotic(double sigma) {
    if (sigma > 0) {
        const double a = airy_ai(sigma), ap = airy_ai_prime(sigma);
        return {a, ap, hamiltonian_u(sigma, a, ap, 0.0)};
    }
    const double x = sigma, r = std::sqrt(-x / 2);
    const double x3 = x * x * x;
    const double corr = 1 + 1 / (8 * x3) - 73 / (128 * x3 * x3);
    const double dcorr = -3 / (8 * x3 * x) + 6 * 73 / (128 * x3 * x3 * x);
    const double q = r * corr, qp = -1 / (4 * r) * corr + r * dcorr;
    return {q, qp, hamiltonian_u(sigma, q, qp, 0.0)};
}

/// Numerov discretisation of the two-point problem on [-L, L], solved by damped Newton.
struct BVPResult {
    std::vector<double> sigma, q;
    int iterations;
    double residual;
};

inline BVPResult pii_bvp(double nu, double L, double h, double q_left, double q_right, const std::vector<double>& guess) {
    const int N = int(std::lround(2 * L / h));
    if (N < 8) throw DomainError("pii_bvp: grid too coarse");
    const double hh = 2 * L / N;
    std::vector<double> s(N + 1), q = guess;
    for (int i = 0; i <= N; ++i) s[i] = -L + i * hh;
    if (int(q.size()) != N + 1) throw DomainError("pii_bvp: guess has the wrong size");
    q[0] = q_left;
    q[N] = q_right;
    const double c = hh * hh / 12;
    auto residual = [&](const std::vector<double>& v, std::vector<double>& G) {
        double worst = 0.0;
        for (int i = 1; i < N; ++i) {
            G[i] = v[i + 1] - 2 * v[i] + v[i - 1] - c * (pii_rhs(s[i + 1], v[i + 1], nu) + 10 * pii_rhs(s[i], v[i], nu) + pii_rhs(s[i - 1], v[i - 1], nu));
            worst = std::max(worst, std::abs(G[i]));
        }
        return worst;
    };
    std::vector<double> G(N + 1, 0.0), lo(N + 1), di(N + 1), up(N + 1), dq(N + 1), trial(N + 1);
    double res = residual(q, G);
    int it = 0;
    for (; it < 100 && res > 1e-15; ++it) {
        for (int i = 1; i < N; ++i) {
            lo[i] = 1 - c * (6 * q[i - 1] * q[i - 1] + s[i - 1]);
            di[i] = -2 - 10 * c * (6 * q[i] * q[i] + s[i]);
            up[i] = 1 - c * (6 * q[i + 1] * q[i + 1] + s[i + 1]);
            dq[i] = -G[i];
        }
        // Thomas sweep over interior unknowns 1..N-1
        for (int i = 2; i < N; ++i) {
            const double m = lo[i] / di[i - 1];
            di[i] -= m * up[i - 1];
            dq[i] -= m * dq[i - 1];
        }
        dq[N - 1] /= di[N - 1];
        for (int i = N - 2; i >= 1; --i) dq[i] = (dq[i] - up[i] * dq[i + 1]) / di[i];
        double lambda = 1.0, newres = res;
        for (int k = 0; k < 30; ++k, lambda *= 0.5) {
            trial = q;
            for (int i = 1; i < N; ++i) trial[i] += lambda * dq[i];
            newres = residual(trial, G);
            if (newres < res || newres < 1e-15) break;
        }
        if (!(newres < res) && newres > 1e-15)
            throw ConvergenceError(detail::cat("pii_bvp: damped Newton stalled, last residual ", res));
        q = trial;
        res = newres;
    }
    if (res > 1e-12) throw ConvergenceError(detail::cat("pii_bvp: Newton did not converge, last residual ", res));
    return {s, q, it, res};
}

/// Grid tables of q_nu, q_nu', u_nu on [-L, L] for nu = 0..ladder_max.
class HMTable {
public:
    std::vector<double> sigma_grid;
    std::vector<double> nu_list;
    std::vector<std::vector<double>> q, qp, u;
    double L = 0.0, step = 0.0;

    int ladder_max() const { return int(nu_list.size()) - 1; }

    /// (q_nu, q_nu', u_nu) at any sigma: quintic Hermite for nu = 0 inside the
    /// window, asymptotics outside, then the Baecklund ladder.
    HMPoint eval(int nu, double sigma) const {
        if (nu < 0 || nu > ladder_max()) throw DomainError(detail::cat("HMTable::eval: nu = ", nu, " outside ladder 0..", ladder_max()));
        HMPoint p = base(sigma);
        for (int k = 0; k < nu; ++k) p = backlund_step(sigma, p, k);
        return p;
    }

    double q_at(double sigma) const { return eval(0, sigma).q; }

    /// max |q'' - 2q^3 - sigma q + nu| on the grid interior. nu = 0 uses a 5-point
    /// second difference of q; ladder levels, whose q' is algebraic, use a 7-point
    /// first difference of q' together with |dq/dsigma - q'| (a second difference
    /// of ladder values only measures roundoff amplified by 1/h^2).
    double pii_residual(int nu, double margin = 0.0) const {
        const auto& v = q.at(nu);
        const auto& d = qp.at(nu);
        double worst = 0.0;
        std::vector<double> dv, dd;
        if (nu > 0) {
            dv = detail::derivative7(v, step);
            dd = detail::derivative7(d, step);
        }
        for (std::size_t i = 3; i + 3 < v.size(); ++i) {
            if (std::abs(sigma_grid[i]) > L - margin) continue;
            const double rhs = pii_rhs(sigma_grid[i], v[i], nu_list[nu]);
            if (nu == 0) {
                const double d2 = (-v[i - 2] + 16 * v[i - 1] - 30 * v[i] + 16 * v[i + 1] - v[i + 2]) / (12 * step * step);
                worst = std::max(worst, std::abs(d2 - rhs));
            } else {
                worst = std::max({worst, std::abs(dd[i] - rhs), std::abs(dv[i] - d[i])});
            }
        }
        return worst;
    }

    /// max |u_nu' + q_nu^2| by a 7-point first difference of the u table.
    double u_residual(int nu, double margin = 0.0) const {
        const auto du = detail::derivative7(u.at(nu), step);
        double worst = 0.0;
        for (std::size_t i = 3; i + 3 < du.size(); ++i)
            if (std::abs(sigma_grid[i]) <= L - margin) worst = std::max(worst, std::abs(du[i] + q[nu][i] * q[nu][i]));
        return worst;
    }

private:
    HMPoint base(double sigma) const {
        if (sigma >= L || sigma <= -L) return hm0_asymptotic(sigma);
        const double pos = (sigma + L) / step;
        const std::size_t i = std::min<std::size_t>(std::size_t(pos), sigma_grid.size() - 2);
        const double t = sigma - sigma_grid[i];
        const auto& v = q[0];
        const auto& d = qp[0];
        const double s0 = sigma_grid[i], s1 = sigma_grid[i + 1];
        const double a0 = pii_rhs(s0, v[i], 0), a1 = pii_rhs(s1, v[i + 1], 0);
        const double b0 = (6 * v[i] * v[i] + s0) * d[i] + v[i], b1 = (6 * v[i + 1] * v[i + 1] + s1) * d[i + 1] + v[i + 1];
        const double qq = detail::hermite5(t, step, v[i], d[i], a0, v[i + 1], d[i + 1], a1);
        const double qd = detail::hermite5(t, step, d[i], a0, b0, d[i + 1], a1, b1);
        return {qq, qd, hamiltonian_u(sigma, qq, qd, 0.0)};
    }
};

/// Initial profile: Ai on the right blending into sqrt(-sigma/2) on the left.
inline std::vector<double> hm_guess(const std::vector<double>& s, double nu) {
    std::vector<double> g(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double x = s[i];
        const double right = nu == 0 ? (x < 100 ? airy_ai(std::max(x, -1e6)) : 0.0) : nu / std::max(x, 1.0);
        g[i] = std::sqrt(std::max(-x / 2, 0.0) + right * right);
    }
    return g;
}

/// Independent BVP for a single nu > -1/2 (used as a cross-check of the ladder).
/// Right datum from q ~ nu/s + 2nu(1 - nu^2)/s^4, left datum sqrt(L/2) + nu/(2L).
inline BVPResult hm_solve_single(double nu, double L, double grid_step) {
    const int N = int(std::lround(2 * L / grid_step));
    std::vector<double> s(N + 1);
    for (int i = 0; i <= N; ++i) s[i] = -L + i * (2 * L / N);
    const double right = nu == 0 ? airy_ai(L) : nu / L + 2 * nu * (1 - nu * nu) / std::pow(L, 4);
    const double left = std::sqrt(L / 2) + nu / (2 * L);
    return pii_bvp(nu, L, grid_step, left, right, hm_guess(s, nu));
}

/// Hastings-McLeod table: nu = 0 by BVP with continuation in L, nu >= 1 by the Baecklund ladder.
inline HMTable hm_solve(double L = 12.0, double grid_step = 0.005, int ladder_max = 2) {
    if (L < 8) throw DomainError(detail::cat("hm_solve: L = ", L, " below 8"));
    if (!(grid_step > 0 && grid_step < 0.1)) throw DomainError(detail::cat("hm_solve: grid_step = ", grid_step, " outside (0, 0.1)"));
    if (ladder_max < 0) throw DomainError("hm_solve: ladder_max must be >= 0");
    // continuation: L = 6 first, then the target window seeded by it
    BVPResult coarse;
    {
        const double L0 = 6.0;
        const int N0 = int(std::lround(2 * L0 / grid_step));
        std::vector<double> s0(N0 + 1);
        for (int i = 0; i <= N0; ++i) s0[i] = -L0 + i * (2 * L0 / N0);
        coarse = pii_bvp(0.0, L0, grid_step, std::sqrt(L0 / 2), airy_ai(L0), hm_guess(s0, 0.0));
    }
    const int N = int(std::lround(2 * L / grid_step));
    const double h = 2 * L / N;
    std::vector<double> s(N + 1);
    for (int i = 0; i <= N; ++i) s[i] = -L + i * h;
    auto guess = hm_guess(s, 0.0);
    for (int i = 0; i <= N; ++i)
        if (std::abs(s[i]) < 6.0) {
            const double pos = (s[i] + 6.0) / (coarse.sigma[1] - coarse.sigma[0]);
            const std::size_t j = std::min<std::size_t>(std::size_t(pos), coarse.q.size() - 2);
            const double t = pos - double(j);
            guess[i] = (1 - t) * coarse.q[j] + t * coarse.q[j + 1];
        }
    const auto sol = pii_bvp(0.0, L, grid_step, std::sqrt(L / 2), airy_ai(L), guess);

    HMTable tab;
    tab.L = L;
    tab.step = h;
    tab.sigma_grid = sol.sigma;
    for (int k = 0; k <= ladder_max; ++k) tab.nu_list.push_back(k);
    tab.q.assign(ladder_max + 1, std::vector<double>(N + 1));
    tab.qp = tab.u = tab.q;
    tab.q[0] = sol.q;
    tab.qp[0] = detail::derivative7(sol.q, h);
    for (int i = 0; i <= N; ++i) {
        if (!(sol.q[i] > 0)) throw ConsistencyError(detail::cat("hm_solve: q_0 not positive at sigma = ", s[i]));
        tab.u[0][i] = hamiltonian_u(s[i], tab.q[0][i], tab.qp[0][i], 0.0);
    }
    for (int k = 1; k <= ladder_max; ++k)
        for (int i = 0; i <= N; ++i) {
            const auto p = backlund_step(s[i], {tab.q[k - 1][i], tab.qp[k - 1][i], tab.u[k - 1][i]}, k - 1);
            tab.q[k][i] = p.q;
            tab.qp[k][i] = p.qp;
            tab.u[k][i] = p.u;
        }
    return tab;
}

// ---------------------------------------------------------------------------
// Flaschka-Newell system  dPsi/dzeta = A(zeta; s) Psi
// ---------------------------------------------------------------------------

using Vec2 = std::array<cplx, 2>;
using Mat2 = std::array<std::array<cplx, 2>, 2>;

inline Mat2 fn_matrix(cplx z, double s, double q, double qp) {
    const cplx a = -I * (4.0 * z * z + s + 2 * q * q);
    return {{{a, 4.0 * z * q + 2.0 * I * qp}, {4.0 * z * q - 2.0 * I * qp, -a}}};
}

inline Vec2 mul(const Mat2& A, const Vec2& v) { return {A[0][0] * v[0] + A[0][1] * v[1], A[1][0] * v[0] + A[1][1] * v[1]}; }

inline cplx fn_theta(cplx z, double s) { return (4.0 / 3.0) * z * z * z + s * z; }

/// Coefficients m_k of the formal solution Psi e^{i theta sigma_3} = sum_k m_k zeta^{-k}.
inline std::vector<Mat2> fn_formal_series(double s, double q, double qp, int K) {
    // work with off-diagonal and diagonal parts separately
    auto S1 = [](const Mat2& X) { return Mat2{{{X[1][0], X[1][1]}, {X[0][0], X[0][1]}}}; };           // sigma_1 X
    auto S2 = [](const Mat2& X) { return Mat2{{{-I * X[1][0], -I * X[1][1]}, {I * X[0][0], I * X[0][1]}}}; };  // sigma_2 X
    auto S3 = [](const Mat2& X) { return Mat2{{{X[0][0], X[0][1]}, {-X[1][0], -X[1][1]}}}; };         // sigma_3 X
    auto add = [](Mat2 a, const Mat2& b, cplx c) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) a[i][j] += c * b[i][j];
        return a;
    };
    auto diag = [](const Mat2& X) { return Mat2{{{X[0][0], 0.0}, {0.0, X[1][1]}}}; };
    auto off = [](const Mat2& X) { return Mat2{{{0.0, X[0][1]}, {X[1][0], 0.0}}}; };
    const Mat2 Z{{{0.0, 0.0}, {0.0, 0.0}}};
    std::vector<Mat2> O(K + 1, Z), D(K + 1, Z);
    D[0] = {{{1.0, 0.0}, {0.0, 1.0}}};
    auto at = [&](const std::vector<Mat2>& v, int k) { return k >= 0 ? v[k] : Z; };
    const cplx c8 = 1.0 / (8.0 * I);
    for (int k = 1; k <= K; ++k) {
        Mat2 r = Z;
        r = add(r, S1(at(D, k - 1)), 4 * q);
        r = add(r, S3(at(O, k - 2)), -2.0 * I * (s + q * q));
        r = add(r, S2(at(D, k - 2)), -2 * qp);
        r = add(r, at(O, k - 3), double(k - 3));
        O[k] = off(add(Z, S3(r), c8));
        Mat2 a = Z, b = Z;
        a = add(a, S3(O[k]), -2.0 * I * (s + q * q));
        a = add(a, at(O, k - 1), double(k - 1));
        b = add(b, S3(at(O, k - 1)), -2.0 * I * (s + q * q));
        b = add(b, S2(at(D, k - 1)), -2 * qp);
        b = add(b, at(O, k - 2), double(k - 2));
        Mat2 rhs = add(Z, S1(add(Z, S3(a), c8)), -4 * q);
        rhs = add(rhs, S2(add(Z, S3(b), c8)), 2 * qp);
        D[k] = add(Z, diag(rhs), 1.0 / k);
    }
    std::vector<Mat2> m(K + 1);
    for (int k = 0; k <= K; ++k) m[k] = add(O[k], D[k], 1.0);
    return m;
}

struct SeedValue {
    Vec2 y;
    double remainder;  ///< size of the smallest retained term, the truncation estimate
};

/// Normalised column c (0 or 1) of Psi e^{i theta sigma_3} at large |z| by optimal truncation.
inline SeedValue fn_seed(cplx z, double s, double q, double qp, int column, int K = 80) {
    const auto m = fn_formal_series(s, q, qp, K);
    std::vector<Vec2> t(K + 1);
    std::vector<double> mag(K + 1);
    cplx zk = 1.0;
    for (int k = 0; k <= K; ++k) {
        t[k] = {m[k][0][column] * zk, m[k][1][column] * zk};
        mag[k] = std::abs(t[k][0]) + std::abs(t[k][1]);
        zk /= z;
    }
    // odd and even orders can differ wildly in size, so the stopping rule looks at pairs
    int stop = K;
    for (int k = 3; k <= K; k += 2) {
        const double cur = mag[k] + mag[k - 1];
        if (cur < 1e-18) {
            stop = k;
            break;
        }
        if (k >= 5 && cur > mag[k - 2] + mag[k - 3]) {
            stop = k - 2;
            break;
        }
    }
    Vec2 y{0.0, 0.0};
    for (int k = 0; k <= stop; ++k) {
        y[0] += t[k][0];
        y[1] += t[k][1];
    }
    return {y, stop >= 1 ? mag[stop] + mag[stop - 1] : 0.0};
}

/// Taylor-series integrator for y' = B(z) y with B quadratic in z.
/// kappa = +1 integrates column 1 times e^{i theta}, -1 column 2 times e^{-i theta},
/// 0 the bare column.
class FNIntegrator {
public:
    FNIntegrator(double s, double q, double qp, int kappa) : s_(s), q_(q), qp_(qp), kappa_(kappa) {}

    /// Advance y from z0 to z1 along the straight segment.
    Vec2 advance(cplx z0, cplx z1, Vec2 y) const {
        cplx z = z0;
        const cplx total = z1 - z0;
        double done = 0.0;
        const double len = std::abs(total);
        if (len == 0.0) return y;
        const cplx dir = total / len;
        while (done < len) {
            const Mat2 B0 = B(z);
            const double nb = std::abs(B0[0][0]) + std::abs(B0[0][1]) + std::abs(B0[1][0]) + std::abs(B0[1][1]);
            double h = std::min(len - done, std::min(1.5 / std::max(nb, 1e-3), 0.25));
            y = taylor_step(z, dir * h, y);
            z += dir * h;
            done += h;
        }
        return y;
    }

    Mat2 B(cplx z) const {
        Mat2 A = fn_matrix(z, s_, q_, qp_);
        const cplx shift = double(kappa_) * I * (4.0 * z * z + s_);
        A[0][0] += shift;
        A[1][1] += shift;
        return A;
    }

private:
    Vec2 taylor_step(cplx z0, cplx h, const Vec2& y0) const {
        // B(z0 + e) = B0 + B1 e + B2 e^2
        const Mat2 B0 = B(z0);
        const cplx a1 = -I * 8.0 * z0 + double(kappa_) * I * 8.0 * z0, a2 = -4.0 * I + double(kappa_) * I * 4.0;
        const cplx d1 = I * 8.0 * z0 + double(kappa_) * I * 8.0 * z0, d2 = 4.0 * I + double(kappa_) * I * 4.0;
        const Mat2 B1{{{a1, 4.0 * q_}, {4.0 * q_, d1}}};
        const Mat2 B2{{{a2, 0.0}, {0.0, d2}}};
        constexpr int N = 40;
        std::array<Vec2, N + 1> c;
        c[0] = y0;
        Vec2 sum = y0;
        cplx hp = 1.0;
        double tail = 0.0;
        for (int j = 0; j < N; ++j) {
            Vec2 t = mul(B0, c[j]);
            if (j >= 1) {
                const Vec2 u = mul(B1, c[j - 1]);
                t[0] += u[0];
                t[1] += u[1];
            }
            if (j >= 2) {
                const Vec2 u = mul(B2, c[j - 2]);
                t[0] += u[0];
                t[1] += u[1];
            }
            c[j + 1] = {t[0] / double(j + 1), t[1] / double(j + 1)};
            hp *= h;
            const Vec2 term{c[j + 1][0] * hp, c[j + 1][1] * hp};
            sum[0] += term[0];
            sum[1] += term[1];
            tail = std::abs(term[0]) + std::abs(term[1]);
            if (j > 8 && tail < 1e-18 * (std::abs(sum[0]) + std::abs(sum[1]))) break;
        }
        return sum;
    }

    double s_, q_, qp_;
    int kappa_;
};

struct PsiOptions {
    double R_max = 12.0;
    double tol = 1e-12;
};

/// f, g and their zeta-derivatives at the nodes (and check nodes) of a rule
/// built on Sigma_T, for PII parameter s.
struct PsiSlice {
    double s = 0.0, q = 0.0, qp = 0.0;
    std::vector<cplx> f, g, fp, gp;
    std::vector<cplx> fc, gc, fpc, gpc;  ///< same at rule.check_nodes
    double seed_remainder = 0.0;
};

/// Recessive column along one ray, returned as the bare (unnormalised) column
/// at the requested radii. Integrates from R_max inward.
inline std::vector<Vec2> fn_ray_column(double s, double q, double qp, const Ray& ray, const std::vector<double>& radii, int column,
                                       const PsiOptions& opt, double* remainder = nullptr) {
    const int kappa = column == 0 ? 1 : -1;
    std::vector<std::size_t> order(radii.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radii[a] > radii[b]; });
    double R = opt.R_max;
    if (!radii.empty()) R = std::max(R, radii[order.front()]);
    cplx z = ray.origin + ray.direction * R;
    const auto seed = fn_seed(z, s, q, qp, column);
    if (remainder) *remainder = std::max(*remainder, seed.remainder);
    if (seed.remainder > opt.tol)
        throw ConvergenceError(detail::cat("psi_solve: asymptotic seed remainder ", seed.remainder, " at |zeta| = ", std::abs(z), " exceeds tol ", opt.tol));
    Vec2 y = seed.y;
    FNIntegrator integ(s, q, qp, kappa);
    std::vector<Vec2> out(radii.size());
    for (std::size_t idx : order) {
        const cplx z1 = ray.origin + ray.direction * radii[idx];
        y = integ.advance(z, z1, y);
        z = z1;
        const cplx e = std::exp(-double(kappa) * I * fn_theta(z, s));
        out[idx] = {y[0] * e, y[1] * e};
    }
    return out;
}

/// Solve for f, g on every node of `rule` (built from `contour`, Sigma_T-like:
/// rays heading into the upper half plane use column 2, the others column 1).
inline PsiSlice psi_solve(double s, double q, double qp, const ContourSpec& contour, const QuadratureRule& rule, const PsiOptions& opt = {}) {
    PsiSlice out;
    out.s = s;
    out.q = q;
    out.qp = qp;
    const std::size_t M = rule.nodes.size(), Mc = rule.check_nodes.size();
    out.f.resize(M);
    out.g.resize(M);
    out.fp.resize(M);
    out.gp.resize(M);
    out.fc.resize(Mc);
    out.gc.resize(Mc);
    out.fpc.resize(Mc);
    out.gpc.resize(Mc);
    for (std::size_t r = 0; r < contour.rays.size(); ++r) {
        std::vector<double> radii;
        std::vector<std::ptrdiff_t> idx;  // >= 0 main node, < 0 check node -(i+1)
        for (std::size_t i = 0; i < M; ++i)
            if (rule.ray[i] == int(r)) {
                radii.push_back(rule.radius[i]);
                idx.push_back(std::ptrdiff_t(i));
            }
        for (std::size_t i = 0; i < Mc && i < rule.check_ray.size(); ++i)
            if (rule.check_ray[i] == int(r)) {
                radii.push_back(rule.check_radius[i]);
                idx.push_back(-std::ptrdiff_t(i) - 1);
            }
        const bool upper = contour.rays[r].direction.imag() > 0;
        const int column = upper ? 1 : 0;
        const double sign = upper ? -1.0 : 1.0;
        const auto cols = fn_ray_column(s, q, qp, contour.rays[r], radii, column, opt, &out.seed_remainder);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const bool main = idx[k] >= 0;
            const std::size_t i = main ? std::size_t(idx[k]) : std::size_t(-idx[k] - 1);
            const cplx z = main ? rule.nodes[i] : rule.check_nodes[i];
            const Vec2 v{sign * cols[k][0], sign * cols[k][1]};
            const Vec2 d = mul(fn_matrix(z, s, q, qp), v);
            (main ? out.f : out.fc)[i] = v[0];
            (main ? out.g : out.gc)[i] = v[1];
            (main ? out.fp : out.fpc)[i] = d[0];
            (main ? out.gp : out.gpc)[i] = d[1];
        }
    }
    return out;
}

/// Both columns of Psi at a real point x, integrated in from the same-side
/// infinity where the asymptotics hold.
inline Mat2 psi_real_axis(double s, double q, double qp, double x, const PsiOptions& opt = {}) {
    const double R = opt.R_max * (x >= 0 ? 1.0 : -1.0);
    Mat2 P;
    for (int c = 0; c < 2; ++c) {
        const int kappa = c == 0 ? 1 : -1;
        const auto seed = fn_seed(R, s, q, qp, c);
        const Vec2 y = FNIntegrator(s, q, qp, kappa).advance(R, x, seed.y);
        const cplx e = std::exp(-double(kappa) * I * fn_theta(x, s));
        P[0][c] = y[0] * e;
        P[1][c] = y[1] * e;
    }
    return P;
}

/// Full matrix transported along a segment by the bare system.
inline Mat2 psi_transport(double s, double q, double qp, cplx z0, cplx z1, const Mat2& P0) {
    FNIntegrator integ(s, q, qp, 0);
    Mat2 P;
    for (int c = 0; c < 2; ++c) {
        const Vec2 y = integ.advance(z0, z1, {P0[0][c], P0[1][c]});
        P[0][c] = y[0];
        P[1][c] = y[1];
    }
    return P;
}

inline cplx det2(const Mat2& P) { return P[0][0] * P[1][1] - P[0][1] * P[1][0]; }

/// Propagate (f, g) at fixed zeta from s0 to s1 with d/ds = [[-i zeta, q], [q, i zeta]] (RK4).
template <class QFun>
Vec2 psi_propagate_s(cplx zeta, double s0, double s1, Vec2 fg, QFun&& qfun, int steps = 200) {
    const double h = (s1 - s0) / steps;
    auto rhs = [&](double s, const Vec2& v) {
        const double qq = qfun(s);
        return Vec2{-I * zeta * v[0] + qq * v[1], qq * v[0] + I * zeta * v[1]};
    };
    double s = s0;
    for (int k = 0; k < steps; ++k) {
        const Vec2 k1 = rhs(s, fg);
        const Vec2 k2 = rhs(s + h / 2, {fg[0] + h / 2 * k1[0], fg[1] + h / 2 * k1[1]});
        const Vec2 k3 = rhs(s + h / 2, {fg[0] + h / 2 * k2[0], fg[1] + h / 2 * k2[1]});
        const Vec2 k4 = rhs(s + h, {fg[0] + h * k3[0], fg[1] + h * k3[1]});
        fg = {fg[0] + h / 6 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]), fg[1] + h / 6 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
        s += h;
    }
    return fg;
}

/// f, g slices for a set of PII parameters on one Sigma_T rule.
struct PsiField {
    ContourSpec contour;
    QuadratureRule rule;
    std::vector<double> s_grid;
    std::vector<PsiSlice> slices;
};

inline PsiField psi_field(const HMTable& hm, const ContourSpec& contour, const QuadratureRule& rule, const std::vector<double>& s_grid,
                          const PsiOptions& opt = {}) {
    PsiField F{contour, rule, s_grid, {}};
    for (double s : s_grid) {
        const auto p = hm.eval(0, s);
        F.slices.push_back(psi_solve(s, p.q, p.qp, contour, rule, opt));
    }
    return F;
}

inline PsiSlice psi_solve(double s, const HMTable& hm, const ContourSpec& contour, const QuadratureRule& rule, const PsiOptions& opt = {}) {
    const auto p = hm.eval(0, s);
    return psi_solve(s, p.q, p.qp, contour, rule, opt);
}

}  // namespace wallbridge
