#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"

namespace wallbridge {

/// Monic polynomials orthogonal on the lattice Z/n with weight e^{-nTs^2/2}.
/// b[k] is the recurrence coefficient of p_{k+1} = x p_k - b_k p_{k-1};
/// b[0] = 0 is padding so that b is indexed by k directly.
struct DGOPSystem {
    int n = 0;
    double T = 0.0;
    int kmax = 0;
    std::vector<double> b;  ///< size kmax + 1
    std::vector<double> h;  ///< size kmax + 1
    int lattice_cutoff = 0;  ///< lattice points |m| <= cutoff, s = m / n
    bool extended_precision = false;  ///< built by the long-double Lanczos fallback
};

namespace detail {

/// Lattice half-width in points: Gaussian-tail bound plus support for degree
/// kmax, clipped where the weight underflows.
inline int lattice_points(int n, double T, int kmax, double eps = 1e-18) {
    const double sw = 1.0 / std::sqrt(n * T);
    const double s_tail = 8.0 * sw * std::sqrt(std::log(1.0 / eps));
    const double s_deg = kmax * std::sqrt(T / n) / n;
    const double s_underflow = std::sqrt(2.0 * 690.0 / (n * T));
    const double s = std::min(std::max(s_tail, s_deg), s_underflow);
    return int(std::ceil(s * n)) + 2;
}

template <class R>
bool stieltjes(int n, double T, int kmax, int M, std::vector<double>& b, std::vector<double>& h) {
    const std::size_t N = std::size_t(M) + 1;  // m = 0..M, symmetric weight
    std::vector<R> s(N), w(N), p0(N, R(0)), p1(N, R(1)), p2(N);
    for (std::size_t i = 0; i < N; ++i) {
        s[i] = R(i) / R(n);
        w[i] = (i == 0 ? R(1) : R(2)) * std::exp(-R(n) * R(T) * s[i] * s[i] / R(2)) / R(n);
    }
    b.assign(kmax + 1, 0.0);
    h.assign(kmax + 1, 0.0);
    R hprev = 1;
    for (int k = 0; k <= kmax; ++k) {
        R hk = 0;
        for (std::size_t i = 0; i < N; ++i) hk += w[i] * p1[i] * p1[i];
        if (!(hk > R(0)) || !std::isfinite(double(hk))) return false;
        h[k] = double(hk);
        const R bk = k ? hk / hprev : R(0);
        if (k && !(bk > R(0))) return false;
        b[k] = double(bk);
        if (k == kmax) break;
        for (std::size_t i = 0; i < N; ++i) p2[i] = s[i] * p1[i] - bk * p0[i];
        std::swap(p0, p1);
        std::swap(p1, p2);
        hprev = hk;
    }
    return true;
}

/// Rutishauser-Kahan-Pal-Walker updating of the Jacobi matrix over the full
/// symmetric lattice. Slower than Stieltjes but stable when kmax approaches the
/// number of lattice points carrying weight.
template <class R>
bool lanczos(int n, double T, int kmax, int M, std::vector<double>& b, std::vector<double>& h) {
    const std::size_t N = 2 * std::size_t(M) + 1;
    std::vector<R> p0(N, R(0)), p1(N, R(0)), x(N), w(N);
    for (std::size_t i = 0; i < N; ++i) {
        const R s = (R(i) - R(M)) / R(n);
        x[i] = s;
        using std::exp;
        w[i] = exp(-R(n) * R(T) * s * s / R(2)) / R(n);
    }
    p0[0] = x[0];
    p1[0] = w[0];
    for (std::size_t m = 1; m < N; ++m) {
        R pn = w[m], gam = 1, sig = 0, t = 0;
        const R lam = x[m];
        for (std::size_t k = 0; k <= m; ++k) {
            const R rho = p1[k] + pn, tmp = gam * rho;
            R tsig = sig;
            if (rho <= R(0)) {
                gam = 1;
                sig = 0;
            } else {
                gam = p1[k] / rho;
                sig = pn / rho;
            }
            const R tk = sig * (p0[k] - lam) - gam * t;
            p0[k] -= tk - t;
            t = tk;
            pn = sig <= R(0) ? tsig * p1[k] : t * t / sig;
            p1[k] = tmp;
        }
    }
    if (std::size_t(kmax) >= N) return false;
    b.assign(kmax + 1, 0.0);
    h.assign(kmax + 1, 0.0);
    R hk = p1[0];
    for (int k = 0; k <= kmax; ++k) {
        if (k) {
            if (!(p1[k] > R(0))) return false;
            b[k] = double(p1[k]);
            hk *= p1[k];
        }
        h[k] = double(hk);
        if (!(h[k] > 0.0)) return false;
    }
    return true;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t x = 1469598103934665603ull;
    for (unsigned char c : s) {
        x ^= c;
        x *= 1099511628211ull;
    }
    return x;
}

}  // namespace detail

/// Monic p_k(x) by the three-term recurrence.
inline double eval_p(const DGOPSystem& sys, int k, double x) {
    if (k < 0 || k > sys.kmax) throw DomainError(detail::cat("eval_p: degree ", k, " outside [0, ", sys.kmax, "]"));
    double p0 = 0.0, p1 = 1.0;
    for (int j = 0; j < k; ++j) {
        const double p2 = x * p1 - sys.b[j] * p0;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

/// Largest |<p_j, p_k>| / sqrt(h_j h_k) over j < k <= kmax.
inline double orthogonality_residual(const DGOPSystem& sys) {
    const int M = sys.lattice_cutoff, K = sys.kmax;
    std::vector<std::vector<double>> P(K + 1, std::vector<double>(M + 1));
    std::vector<double> w(M + 1);
    for (int m = 0; m <= M; ++m) {
        const double s = double(m) / sys.n;
        w[m] = (m == 0 ? 1.0 : 2.0) * std::exp(-sys.n * sys.T * s * s / 2) / sys.n;
        // orthonormal recurrence: monic values overflow at high degree
        double p0 = 0.0, p1 = 1.0 / std::sqrt(sys.h[0]);
        for (int k = 0; k <= K; ++k) {
            P[k][m] = p1;
            if (k == K) break;
            const double p2 = (s * p1 - (k ? std::sqrt(sys.b[k]) : 0.0) * p0) / std::sqrt(sys.b[k + 1]);
            p0 = p1;
            p1 = p2;
        }
    }
    double worst = 0.0;
    for (int j = 0; j <= K; ++j)
        for (int k = j + 2; k <= K; k += 2) {  // opposite parity vanishes identically
            double ip = 0.0;
            for (int m = 0; m <= M; ++m) ip += w[m] * P[j][m] * P[k][m];
            worst = std::max(worst, std::abs(ip));
        }
    return worst;
}

namespace detail {

inline std::filesystem::path cache_path(int n, double T, int kmax, int M) {
    const char* dir = std::getenv("WALLBRIDGE_CACHE_DIR");
    if (!dir || !*dir) return {};
    const std::string key = cat("dgop:", n, ":", T, ":", kmax, ":", M);
    char name[40];
    std::snprintf(name, sizeof name, "dgop-%016llx.bin", static_cast<unsigned long long>(fnv1a(key)));
    return std::filesystem::path(dir) / name;
}

/// Header line of JSON, then b and h as little-endian f64.
inline bool load_cached(const std::filesystem::path& p, DGOPSystem& sys) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return false;
    std::string line;
    if (!std::getline(in, line)) return false;
    const auto hdr = nlohmann::json::parse(line, nullptr, false);
    if (hdr.is_discarded() || hdr.value("n", -1) != sys.n || hdr.value("kmax", -1) != sys.kmax ||
        hdr.value("T", -1.0) != sys.T || hdr.value("lattice_cutoff", -1) != sys.lattice_cutoff)
        return false;
    sys.b.resize(sys.kmax + 1);
    sys.h.resize(sys.kmax + 1);
    in.read(reinterpret_cast<char*>(sys.b.data()), std::streamsize(sys.b.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(sys.h.data()), std::streamsize(sys.h.size() * sizeof(double)));
    sys.extended_precision = hdr.value("extended_precision", false);
    return bool(in);
}

inline void store_cached(const std::filesystem::path& p, const DGOPSystem& sys) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    const auto tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) return;
        nlohmann::json hdr = {{"n", sys.n}, {"T", sys.T}, {"kmax", sys.kmax}, {"lattice_cutoff", sys.lattice_cutoff},
                              {"extended_precision", sys.extended_precision}, {"layout", "b[kmax+1] h[kmax+1] f64 le"}};
        out << hdr.dump() << '\n';
        out.write(reinterpret_cast<const char*>(sys.b.data()), std::streamsize(sys.b.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(sys.h.data()), std::streamsize(sys.h.size() * sizeof(double)));
    }
    std::filesystem::rename(tmp, p, ec);
}

}  // namespace detail

/// Discrete Stieltjes procedure in double, falling back to long-double Lanczos
/// when positivity or orthogonality breaks.
/// lattice_cutoff = 0 picks the default truncation.
inline DGOPSystem build_system(int n, double T, int kmax, int lattice_cutoff = 0, bool check = true) {
    if (n < 1) throw DomainError(detail::cat("build_system: n = ", n, " must be >= 1"));
    if (!(T > 0.0)) throw DomainError(detail::cat("build_system: T = ", T, " must be positive"));
    if (kmax < 0 || kmax > 4 * n) throw DomainError(detail::cat("build_system: kmax = ", kmax, " outside [0, 4n]"));
    DGOPSystem sys;
    sys.n = n;
    sys.T = T;
    sys.kmax = kmax;
    sys.lattice_cutoff = lattice_cutoff > 0 ? lattice_cutoff : detail::lattice_points(n, T, kmax);
    const auto cp = detail::cache_path(n, T, kmax, sys.lattice_cutoff);
    if (!cp.empty() && detail::load_cached(cp, sys)) return sys;
    bool ok = detail::stieltjes<double>(n, T, kmax, sys.lattice_cutoff, sys.b, sys.h);
    double r = ok ? orthogonality_residual(sys) : HUGE_VAL;
    if (!(r <= 1e-10)) {
        sys.extended_precision = true;
        if (!detail::lanczos<long double>(n, T, kmax, sys.lattice_cutoff, sys.b, sys.h))
            throw ConvergenceError(detail::cat("build_system: recurrence lost positivity at (n, T, kmax) = (", n, ", ", T, ", ", kmax, ")"));
        r = orthogonality_residual(sys);
    }
    if (check && !(r <= 1e-10)) throw ConvergenceError(detail::cat("build_system: orthogonality residual ", r, " above 1e-10"));
    if (!cp.empty()) detail::store_cached(cp, sys);
    return sys;
}

/// S_{k,a}(x) = (1/n) sum_{s in L_n} p_k(s) e^{-nas^2/2} e^{insx}. Even k gives a
/// real value, odd k a purely imaginary one.
inline cplx s_transform(const DGOPSystem& sys, int k, double a, double x) {
    if (!(a > 0.0)) throw DomainError(detail::cat("s_transform: a = ", a, " must be positive"));
    if (k < 0 || k > sys.kmax) throw DomainError(detail::cat("s_transform: degree ", k, " outside [0, ", sys.kmax, "]"));
    const int n = sys.n;
    double bmax = 0.0;
    for (int j = 1; j <= k; ++j) bmax = std::max(bmax, sys.b[j]);
    // beyond 2 sqrt(max b) every zero of p_k is behind us
    const double peak = std::max(std::sqrt((k + 1.0) / (n * a)), std::sqrt(bmax));
    double sum = eval_p(sys, k, 0.0), biggest = std::abs(sum);
    for (int m = 1; m < 100000000; ++m) {
        const double s = double(m) / n;
        const double term = eval_p(sys, k, s) * std::exp(-n * a * s * s / 2);
        sum += 2.0 * term * (k % 2 == 0 ? std::cos(n * s * x) : std::sin(n * s * x));
        biggest = std::max(biggest, std::abs(term));
        // past the peak the terms fall faster than geometrically
        if (s > 2.0 * peak && std::abs(term) < 1e-17 * biggest) break;
    }
    return k % 2 == 0 ? cplx(sum / n, 0.0) : cplx(0.0, sum / n);
}

}  // namespace wallbridge
