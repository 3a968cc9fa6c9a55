#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "core.hpp"
#include "dgop.hpp"

namespace wallbridge {

enum class BoundaryCondition { reflect, absorb, circle };

inline const char* to_string(BoundaryCondition bc) {
    switch (bc) {
        case BoundaryCondition::reflect: return "reflect";
        case BoundaryCondition::absorb: return "absorb";
        case BoundaryCondition::circle: return "circle";
    }
    return "?";
}

inline BoundaryCondition parse_bc(const std::string& s) {
    if (s == "reflect") return BoundaryCondition::reflect;
    if (s == "absorb") return BoundaryCondition::absorb;
    if (s == "circle") return BoundaryCondition::circle;
    throw DomainError("unknown boundary condition '" + s + "' (reflect, absorb, circle)");
}

struct SpaceTimePoint {
    double t;
    double x;
};

namespace detail {

inline void check_position(BoundaryCondition bc, double x, const char* who) {
    const bool ok = bc == BoundaryCondition::circle ? (x > -pi - 1e-12 && x <= pi + 1e-12) : (x >= 0.0 && x <= pi);
    if (!ok) throw DomainError(cat(who, ": position ", x, " outside the ", to_string(bc), " domain"));
}

}  // namespace detail

/// Heat kernel with diffusion n^{-1/2}: Gaussian images. Circle case is the
/// periodic kernel on (-pi, pi].
inline double trans_density_images(BoundaryCondition bc, double x, double y, double t, int n, double eps = 1e-18) {
    const int K = 2 + int(std::ceil(std::sqrt(t * std::log(1.0 / eps) / (2 * pi * n))));
    const double c = std::sqrt(n / (2 * pi * t));
    double s = 0.0;
    for (int k = -K; k <= K; ++k) {
        const double a = y - x + 2 * k * pi, b = y + x + 2 * k * pi;
        const double ga = std::exp(-n * a * a / (2 * t));
        switch (bc) {
            case BoundaryCondition::reflect: s += ga + std::exp(-n * b * b / (2 * t)); break;
            case BoundaryCondition::absorb: s += ga - std::exp(-n * b * b / (2 * t)); break;
            case BoundaryCondition::circle: s += ga; break;
        }
    }
    return c * s;
}

/// Same kernels from their cosine / sine / exponential Fourier series.
inline double trans_density_fourier(BoundaryCondition bc, double x, double y, double t, int n, double eps = 1e-18) {
    const int K = 2 + int(std::ceil(std::sqrt(2.0 * n * std::log(1.0 / eps) / t)));
    double s = 0.0;
    for (int k = 1; k <= K; ++k) {
        const double e = std::exp(-t * k * k / (2.0 * n));
        switch (bc) {
            case BoundaryCondition::reflect: s += 2 * std::cos(k * x) * std::cos(k * y) * e; break;
            case BoundaryCondition::absorb: s += 2 * std::sin(k * x) * std::sin(k * y) * e; break;
            case BoundaryCondition::circle: s += std::cos(k * (x - y)) * e; break;
        }
    }
    switch (bc) {
        case BoundaryCondition::reflect: return (1.0 + s) / pi;
        case BoundaryCondition::absorb: return s / pi;
        case BoundaryCondition::circle: return (1.0 + 2.0 * s) / (2 * pi);
    }
    return 0.0;
}

/// P^{bc}(x, y; t) for diffusion parameter n^{-1/2}; picks the faster representation.
inline double trans_density(BoundaryCondition bc, double x, double y, double t, int n) {
    detail::check_position(bc, x, "trans_density");
    detail::check_position(bc, y, "trans_density");
    if (!(t > 0.0)) throw DomainError(detail::cat("trans_density: t = ", t, " must be positive"));
    if (n < 1) throw DomainError(detail::cat("trans_density: n = ", n, " must be >= 1"));
    return t / n < 2 * pi ? trans_density_images(bc, x, y, t, n) : trans_density_fourier(bc, x, y, t, n);
}

namespace detail {

/// One pass over the lattice in arithmetic R. val[k] = S_{k,a}(x) with the
/// factor i dropped for odd k; big[k] = max |term| / n bounds the rounding noise.
template <class R>
void s_transform_lattice(const DGOPSystem& sys, int K, double a, double x, std::vector<double>& val, std::vector<double>& big) {
    using std::cos, std::exp, std::sin, std::abs;
    const int n = sys.n;
    double bmax = 0.0;
    for (int j = 1; j <= K; ++j) bmax = std::max(bmax, sys.b[j]);
    const double reach = std::max(std::sqrt((K + 1.0) / (n * a)), std::sqrt(bmax));
    const R stop = R(std::numeric_limits<R>::epsilon()) / 16;
    std::vector<R> re(K + 1, R(0)), bg(K + 1, R(0)), b(K + 1);
    for (int k = 0; k <= K; ++k) b[k] = R(sys.b[k]);
    {
        R p0 = 0, p1 = 1;
        for (int k = 0; k <= K; ++k) {
            re[k] = p1;  // the s = 0 lattice point
            bg[k] = abs(p1);
            const R p2 = -b[k] * p0;
            p0 = p1;
            p1 = p2;
        }
    }
    const R rn = R(n), ra = R(a), rx = R(x);
    for (int m = 1;; ++m) {
        const R s = R(m) / rn, g = exp(-rn * ra * s * s / 2);
        const R c = cos(rn * s * rx), sn = sin(rn * s * rx);
        R p0 = 0, p1 = 1, worst = 0;
        for (int k = 0; k <= K; ++k) {
            const R term = p1 * g;
            re[k] += 2 * term * (k % 2 == 0 ? c : sn);
            const R at = abs(term);
            if (at > bg[k]) bg[k] = at;
            if (bg[k] > 0 && at / bg[k] > worst) worst = at / bg[k];
            const R p2 = s * p1 - b[k] * p0;
            p0 = p1;
            p1 = p2;
        }
        if (double(s) > 2.0 * reach && worst < stop) break;
        if (m > 100000000) throw ConvergenceError("s_transform_all: lattice sum did not converge");
    }
    val.resize(K + 1);
    big.resize(K + 1);
    for (int k = 0; k <= K; ++k) {
        val[k] = double(re[k] / rn);
        big[k] = double(bg[k] / rn);
    }
}

using Float50 = boost::multiprecision::cpp_bin_float_50;
using Float100 = boost::multiprecision::cpp_bin_float_100;
using Float200 = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>>;

inline void s_transform_tier(int tier, const DGOPSystem& sys, int K, double a, double x, std::vector<double>& val, std::vector<double>& big) {
    switch (tier) {
        case 0: return s_transform_lattice<double>(sys, K, a, x, val, big);
        case 1: return s_transform_lattice<Float50>(sys, K, a, x, val, big);
        case 2: return s_transform_lattice<Float100>(sys, K, a, x, val, big);
        default: return s_transform_lattice<Float200>(sys, K, a, x, val, big);
    }
}

inline constexpr double tier_eps[] = {2.3e-16, 1e-50, 1e-100, 1e-200};

}  // namespace detail

/// S_{k,a}(x) for k = 0..K in one pass over the lattice, in double.
inline std::vector<cplx> s_transform_all(const DGOPSystem& sys, int K, double a, double x) {
    if (!(a > 0.0)) throw DomainError(detail::cat("s_transform_all: a = ", a, " must be positive"));
    if (K > sys.kmax) throw DomainError(detail::cat("s_transform_all: degree ", K, " above kmax ", sys.kmax));
    std::vector<double> v, big;
    detail::s_transform_lattice<double>(sys, K, a, x, v, big);
    std::vector<cplx> out(K + 1);
    for (int k = 0; k <= K; ++k) out[k] = k % 2 == 0 ? cplx(v[k], 0.0) : cplx(0.0, v[k]);
    return out;
}

/// Smallest DGOP degree a kernel of this type needs.
inline int required_degree(BoundaryCondition bc, int n) { return bc == BoundaryCondition::circle ? n - 1 : 2 * n - 1; }

/// Heat-kernel part W for tj > ti, zero otherwise.
inline double w_circ(BoundaryCondition bc, double ti, double tj, double x, double y, int n) {
    if (!(tj > ti)) return 0.0;
    const double t = tj - ti;
    return t / n < 2 * pi ? trans_density_images(bc, x, y, t, n) : trans_density_fourier(bc, x, y, t, n);
}

/// K-tilde: the double-sum part of the extended kernel.
/// Near the walls and away from T/2 the lattice sums are exponentially small
/// against their terms. The double pass carries a noise bound; when it exceeds
/// 1e-10 the sums are redone in 50, 100 or 200 digits.
inline double kernel_tilde(BoundaryCondition bc, const DGOPSystem& sys, double ti, double tj, double x, double y) {
    const int n = sys.n;
    const double T = sys.T;
    const int K = required_degree(bc, n);
    if (sys.kmax < K) throw DomainError(detail::cat("kernel_finite: DGOPSystem built to degree ", sys.kmax, ", need ", K));
    const int first = bc == BoundaryCondition::absorb ? 1 : 0, stride = bc == BoundaryCondition::circle ? 1 : 2;
    const double pref = bc == BoundaryCondition::circle ? n / (2 * pi) : n / pi;
    // odd k carries i from each transform, and i * (-i) from y -> -y gives +1
    std::vector<double> A, bA, B, bB;
    double noise = 0.0, value = 0.0;
    for (int tier = 0; tier < 4; ++tier) {
        detail::s_transform_tier(tier, sys, K, T - ti, x, A, bA);
        detail::s_transform_tier(tier, sys, K, tj, -y, B, bB);
        const double eps = detail::tier_eps[tier] * std::sqrt(double(sys.lattice_cutoff) + 1.0);
        double s = 0.0, e = 0.0;
        for (int k = first; k <= K; k += stride) {
            const double sign = k % 2 == 0 ? 1.0 : -1.0;
            s += sign * A[k] * B[k] / sys.h[k];
            e += (bA[k] * std::abs(B[k]) + std::abs(A[k]) * bB[k] + eps * bA[k] * bB[k]) / sys.h[k];
        }
        value = pref * s;
        noise = pref * eps * e + 1e-300;
        if (noise < 1e-10 * std::max(1.0, std::abs(value))) return value;
    }
    throw ConvergenceError(detail::cat("kernel_tilde: rounding noise ", noise, " at (", ti, ", ", tj, ", ", x, ", ", y, ") even in 200 digits"));
}

/// Extended kernel K_{ti,tj}(x, y) = K-tilde - 1_{ti<tj} W.
inline double kernel_finite(BoundaryCondition bc, const DGOPSystem& sys, double ti, double tj, double x, double y) {
    const double T = sys.T;
    if (!(ti > 0 && ti < T && tj > 0 && tj < T))
        throw DomainError(detail::cat("kernel_finite: times (", ti, ", ", tj, ") outside (0, ", T, ")"));
    detail::check_position(bc, x, "kernel_finite");
    detail::check_position(bc, y, "kernel_finite");
    return kernel_tilde(bc, sys, ti, tj, x, y) - w_circ(bc, ti, tj, x, y, sys.n);
}

/// Convenience owner of the DGOP system for one (bc, n, T).
class FiniteKernel {
public:
    FiniteKernel(BoundaryCondition bc, int n, double T) : bc_(bc), sys_(build_system(n, T, required_degree(bc, n))) {}
    double operator()(double ti, double tj, double x, double y) const { return kernel_finite(bc_, sys_, ti, tj, x, y); }
    const DGOPSystem& system() const { return sys_; }
    BoundaryCondition bc() const { return bc_; }

private:
    BoundaryCondition bc_;
    DGOPSystem sys_;
};

/// det(K_{t_a,t_b}(x_a, x_b)) over the given space-time points.
inline double corr_det(const FiniteKernel& K, const std::vector<SpaceTimePoint>& pts) {
    const int m = int(pts.size());
    Eigen::MatrixXd A(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) A(a, b) = K(pts[a].t, pts[b].t, pts[a].x, pts[b].x);
    return m == 0 ? 1.0 : A.determinant();
}

inline double corr_det(BoundaryCondition bc, const std::vector<SpaceTimePoint>& pts, int n, double T) {
    return corr_det(FiniteKernel(bc, n, T), pts);
}

}  // namespace wallbridge
