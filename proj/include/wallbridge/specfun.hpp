#pragma once

#include <cmath>
#include <utility>

#include <boost/math/special_functions/airy.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "core.hpp"

namespace wallbridge {

/// Ai(x). Backed by Boost.Math; the negative axis is capped at -1e6 where the
/// oscillation is far beyond what double arguments resolve.
inline double airy_ai(double x) {
    if (!std::isfinite(x)) throw DomainError("airy_ai: non-finite argument");
    if (x < -1e6) throw DomainError(detail::cat("airy_ai: x = ", x, " below supported range -1e6"));
    if (x > 105.0) return 0.0;  // below the smallest subnormal
    return boost::math::airy_ai(x);
}

inline double airy_ai_prime(double x) {
    if (!std::isfinite(x)) throw DomainError("airy_ai_prime: non-finite argument");
    if (x < -1e6) throw DomainError(detail::cat("airy_ai_prime: x = ", x, " below supported range -1e6"));
    if (x > 105.0) return 0.0;
    return boost::math::airy_ai_prime(x);
}

enum class BesselKind { J, I };

/// J_alpha(x) or I_alpha(x) for real order alpha > -1 and x >= 0.
inline double bessel(BesselKind kind, double alpha, double x) {
    if (!(alpha > -1.0)) throw DomainError(detail::cat("bessel: alpha = ", alpha, " must exceed -1"));
    if (!(x >= 0.0)) throw DomainError(detail::cat("bessel: x = ", x, " must be >= 0"));
    if (x == 0.0) {
        if (alpha == 0.0) return 1.0;
        if (alpha > 0.0) return 0.0;
        throw DomainError("bessel: x = 0 with negative order is singular");
    }
    return kind == BesselKind::J ? boost::math::cyl_bessel_j(alpha, x) : boost::math::cyl_bessel_i(alpha, x);
}

/// e^{-x} I_alpha(x), usable far past the overflow point of I_alpha itself.
inline double bessel_i_scaled(double alpha, double x) {
    if (x < 500.0) return std::exp(-x) * bessel(BesselKind::I, alpha, x);
    // Hankel expansion; at x >= 500 a dozen terms reach double precision.
    const double mu = 4.0 * alpha * alpha;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 30; ++k) {
        term *= -(mu - (2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * x);
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum / std::sqrt(2.0 * pi * x);
}

/// Entire part of J_alpha: (z/2)^{-alpha} J_alpha(z) = sum_k (-z^2/4)^k / (k! Gamma(k+alpha+1)).
/// Complex argument, real order; free of branch cuts.
inline cplx bessel_j_reduced(double alpha, cplx z) {
    if (!(alpha > -1.0)) throw DomainError(detail::cat("bessel_j_reduced: alpha = ", alpha, " must exceed -1"));
    if (std::abs(z) > 60.0) throw DomainError("bessel_j_reduced: |z| > 60 loses all digits in the power series");
    const cplx w = -0.25 * z * z;
    cplx term = 1.0 / boost::math::tgamma(alpha + 1.0);
    cplx sum = term;
    double biggest = std::abs(term);
    for (int k = 0; k < 400; ++k) {
        term *= w / ((k + 1.0) * (k + 1.0 + alpha));
        sum += term;
        const double a = std::abs(term);
        biggest = std::max(biggest, a);
        if (k > std::abs(z) && a < 1e-18 * biggest) break;
    }
    return sum;
}

struct EllipticKE {
    double K;
    double E;
};

namespace detail {

inline EllipticKE elliptic_agm(double k, double kp) {
    double a = 1.0, b = kp, c = k;
    double acc = 0.5 * c * c, pow2 = 0.5;
    for (int it = 0; it < 60 && std::abs(c) > 1e-17 * a; ++it) {
        const double an = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = std::sqrt(a * b);
        a = an;
        pow2 *= 2.0;
        acc += pow2 * c * c;
    }
    const double K = pi / (2.0 * a);
    return {K, K * (1.0 - acc)};
}

}  // namespace detail

/// Complete elliptic integrals of the first and second kind, modulus k, by the AGM.
inline EllipticKE elliptic_KE(double k) {
    if (!(k >= 0.0 && k < 1.0)) throw DomainError(detail::cat("elliptic_KE: k = ", k, " outside [0,1)"));
    return detail::elliptic_agm(k, std::sqrt((1.0 - k) * (1.0 + k)));
}

/// Same from the complementary modulus k' = sqrt(1 - k^2), accurate as k -> 1.
inline EllipticKE elliptic_KE_complement(double kp) {
    if (!(kp > 0.0 && kp <= 1.0)) throw DomainError(detail::cat("elliptic_KE_complement: k' = ", kp, " outside (0,1]"));
    return detail::elliptic_agm(std::sqrt((1.0 - kp) * (1.0 + kp)), kp);
}

/// Jacobi theta_3(z, q) = sum_k e^{2kiz} q^{k^2}, direct sum.
inline cplx theta3(cplx z, double q) {
    if (!(q >= 0.0 && q < 1.0)) throw DomainError(detail::cat("theta3: q = ", q, " outside [0,1)"));
    if (q == 0.0) return 1.0;
    const double lq = std::log(q), y = std::abs(z.imag());
    cplx sum = 1.0;
    for (int k = 1; k < 100000; ++k) {
        sum += 2.0 * std::exp(lq * k * k) * std::cos(2.0 * k * z);
        // past the peak of q^{k^2} e^{2k|y|} the tail is below twice the last bound
        const double log_bound = lq * k * k + 2.0 * k * y + std::log(2.0);
        if (k > y / -lq && log_bound < std::log(1e-17 * std::max(1.0, std::abs(sum)))) break;
    }
    return sum;
}

/// theta_3 through its Gaussian-image (Poisson dual) sum:
/// theta_3(z, e^{-pi t}) = t^{-1/2} sum_m exp(-(z - pi m)^2 / (pi t)).
inline cplx theta3_image(cplx z, double q) {
    if (!(q >= 0.0 && q < 1.0)) throw DomainError(detail::cat("theta3_image: q = ", q, " outside [0,1)"));
    if (q == 0.0) return 1.0;
    const double t = -std::log(q) / pi;
    const double m0 = std::round(z.real() / pi);
    cplx sum = 0.0;
    for (int j = 0; j < 100000; ++j) {
        cplx part = std::exp(-std::pow(z - pi * (m0 + j), 2) / (pi * t));
        if (j > 0) part += std::exp(-std::pow(z - pi * (m0 - j), 2) / (pi * t));
        sum += part;
        const double d = pi * (j - 0.5);
        if (j > 1 && (d * d - z.imag() * z.imag()) / (pi * t) > 45.0) break;
    }
    return sum / std::sqrt(t);
}

}  // namespace wallbridge
