#pragma once
// Independent reference computations shared by the unit tests. Nothing here
// calls into the library headers.

#include <cmath>
#include <complex>
#include <functional>
#include <utility>

namespace oracle {

/// Adaptive Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 40) {
    tol /= 16;
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double a, double b, double fa, double fm, double fb, double whole, int d) -> double {
        const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double flm = f(lm), frm = f(rm);
        const double left = (b - a) / 12 * (fa + 4 * flm + fm), right = (b - a) / 12 * (fm + 4 * frm + fb);
        if (d <= 0 || std::abs(left + right - whole) < 15 * tol) return left + right + (left + right - whole) / 15;
        return rec(a, m, fa, flm, fm, left, d - 1) + rec(m, b, fm, frm, fb, right, d - 1);
    };
    // start from 16 panels so a lucky coarse sample cannot stop the recursion early
    double total = 0.0;
    for (int i = 0; i < 16; ++i) {
        const double lo = a + (b - a) * i / 16, hi = a + (b - a) * (i + 1) / 16;
        const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
        total += rec(lo, hi, fa, fm, fb, (hi - lo) / 6 * (fa + 4 * fm + fb), depth);
    }
    return total;
}

/// Ai by its Maclaurin series in long double; reliable for |x| <= 6.
inline double airy_series(double xd) {
    const long double x = xd, c1 = 0.355028053887817239260L, c2 = 0.258819403792806798405L;
    long double f = 1, g = x, tf = 1, tg = x;
    for (int k = 1; k < 200; ++k) {
        tf *= x * x * x / ((3.0L * k - 1) * (3.0L * k));
        tg *= x * x * x / ((3.0L * k) * (3.0L * k + 1));
        f += tf;
        g += tg;
        if (std::abs(tf) + std::abs(tg) < 1e-24L) break;
    }
    return double(c1 * f - c2 * g);
}

/// Ai' by differentiating the same series.
inline double airy_prime_series(double xd) {
    const long double x = xd, c1 = 0.355028053887817239260L, c2 = 0.258819403792806798405L;
    long double f = 0, g = 1, tf = 1, tg = 1;
    for (int k = 1; k < 200; ++k) {
        tf *= x * x * x / ((3.0L * k - 1) * (3.0L * k));
        tg *= x * x * x / ((3.0L * k) * (3.0L * k + 1));
        f += tf * 3 * k / x;
        g += tg * (3 * k + 1);
        if (std::abs(tf) + std::abs(tg) < 1e-24L) break;
    }
    return double(c1 * f - c2 * g);
}

/// Hastings-McLeod q and q' on [sigma_end, 6] by long-double RK4 of q'' = 2q^3 + s q
/// started from Airy data at s = 6, where q - Ai is O(Ai^3).
inline std::pair<double, double> hm_shoot(double sigma_end, int steps_per_unit = 4000) {
    using R = long double;
    R s = 6, q = airy_series(6.0), p = airy_prime_series(6.0);
    const int N = int((6 - sigma_end) * steps_per_unit);
    const R h = -(6 - (R)sigma_end) / N;
    auto acc = [](R s, R q) { return 2 * q * q * q + s * q; };
    for (int i = 0; i < N; ++i) {
        const R k1q = p, k1p = acc(s, q);
        const R k2q = p + h / 2 * k1p, k2p = acc(s + h / 2, q + h / 2 * k1q);
        const R k3q = p + h / 2 * k2p, k3p = acc(s + h / 2, q + h / 2 * k2q);
        const R k4q = p + h * k3p, k4p = acc(s + h, q + h * k3q);
        q += h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
        p += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
        s += h;
    }
    return {double(q), double(p)};
}

/// I_alpha by its power series.
inline double bessel_i_series(double alpha, double x) {
    long double term = std::pow((long double)(x / 2), (long double)alpha) / std::tgamma((long double)alpha + 1), sum = term;
    for (int k = 1; k < 300; ++k) {
        term *= (long double)(x * x / 4) / (k * (k + alpha));
        sum += term;
        if (std::abs(term) < 1e-22L * std::abs(sum)) break;
    }
    return double(sum);
}

}  // namespace oracle
