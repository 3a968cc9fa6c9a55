#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>
#include <json.hpp>

#include "core.hpp"
#include "finite_process.hpp"

namespace wallbridge {

/// How sample_paths draws an ensemble.
///  rejection: independent exact wall bridges per particle, whole path rejected on
///    an ordering violation at a slice or, between slices, with the Karlin-McGregor
///    crossing probability.
///  skeleton: each slice drawn exactly from its law given the previous slice and the
///    end points, no rejection. Same target law; usable where rejection is too rare.
enum class SamplerMethod { rejection, skeleton };

inline const char* to_string(SamplerMethod m) { return m == SamplerMethod::rejection ? "rejection" : "skeleton"; }

inline SamplerMethod parse_method(const std::string& s) {
    if (s == "rejection") return SamplerMethod::rejection;
    if (s == "skeleton") return SamplerMethod::skeleton;
    throw DomainError("unknown sampler method '" + s + "' (rejection, skeleton)");
}

/// Accepted nonintersecting bridge samples. paths holds samples x (steps + 1) x n
/// positions as f32, particle index fastest within a time slice.
struct PathEnsemble {
    BoundaryCondition bc = BoundaryCondition::reflect;
    SamplerMethod method = SamplerMethod::rejection;
    int n = 0;
    double T = 0.0;
    int steps = 0;
    double eps = 0.0;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::uint64_t attempts = 0;
    std::vector<float> paths;

    double acceptance_rate() const { return attempts ? double(samples) / double(attempts) : 0.0; }
    double time(int k) const { return T * k / steps; }
    float at(std::size_t s, int k, int i) const { return paths[(s * (steps + 1) + k) * n + i]; }
};

inline double default_eps(int n) { return 0.05 * pi / n; }

namespace detail {

inline int image_reach(double v) { return 1 + int(std::ceil(12.0 * std::sqrt(v) / (2 * pi))); }

/// Wall heat kernel for diffusion n^{-1/2}, images |k| <= image_reach (relative 1e-18).
inline double heat_fast(BoundaryCondition bc, double x, double y, double t, int n) {
    const double v = t / n;
    const int K = image_reach(v);
    double s = 0.0;
    for (int k = -K; k <= K; ++k) {
        const double a = y - x + 2 * k * pi, b = y + x + 2 * k * pi;
        const double ga = std::exp(-a * a / (2 * v)), gb = std::exp(-b * b / (2 * v));
        s += bc == BoundaryCondition::absorb ? ga - gb : ga + gb;
    }
    return s / std::sqrt(2 * pi * v);
}

/// Images of x (sign, centre) whose Gaussian of variance v is above e^{-37} (1e-16)
/// somewhere on [0, pi]; the rest are below the resolution of the sampled positions.
inline int wall_images(BoundaryCondition bc, double x, double v, double* sg, double* ctr) {
    const int K = image_reach(v);
    int m = 0;
    for (int k = -K; k <= K; ++k)
        for (int r = 0; r < 2; ++r) {
            const double c = r ? -x - 2 * k * pi : x + 2 * k * pi;
            const double d = c < 0 ? -c : (c > pi ? c - pi : 0.0);
            if (d * d / (2 * v) > 37.0) continue;
            sg[m] = r && bc == BoundaryCondition::absorb ? -1.0 : 1.0;
            ctr[m++] = c;
        }
    return m;
}

/// P(x, y; dt) P(y, b; tau) as a function of y on [0, pi]: a signed sum of Gaussians
/// with common variance dt tau / ((dt + tau) n). Each pair of images a of x and c of
/// b contributes g_{dt+tau}(a - c) N(y; (tau a + dt c)/(dt + tau)).
inline void bridge_terms(BoundaryCondition bc, double x, double b, double dt, double tau, int n, double coef, std::vector<double>& w,
                         std::vector<double>& mu) {
    double sa[64], ca[64], sc[64], cc[64];
    const int na = wall_images(bc, x, dt / n, sa, ca), nc = wall_images(bc, b, tau / n, sc, cc);
    const double s = (dt + tau) / n, norm = coef / std::sqrt(2 * pi * s);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nc; ++j) {
            const double d = ca[i] - cc[j], e = d * d / (2 * s);
            if (e > 37.0) continue;
            w.push_back(sa[i] * sc[j] * norm * std::exp(-e));
            mu.push_back((tau * ca[i] + dt * cc[j]) / (dt + tau));
        }
}

/// Draws y from the density sum_t w_t N(y; mu_t, sd^2) on [0, pi] (nonnegative there)
/// by inverting its closed-form distribution function (safeguarded Newton to 1e-11,
/// far below the f32 storage resolution). Terms
/// whose mass on [0, pi] is below 1e-16 of the largest weight are dropped first.
template <class Rng>
double invert_mixture(std::vector<double>& w, std::vector<double>& mu, double sd, Rng& rng) {
    double wmax = 0.0;
    for (double v : w) wmax = std::max(wmax, std::abs(v));
    std::size_t m = 0;
    for (std::size_t t = 0; t < w.size(); ++t) {
        const double dist = mu[t] < 0 ? -mu[t] : (mu[t] > pi ? mu[t] - pi : 0.0), z = dist / sd;
        if (std::abs(w[t]) * std::exp(-0.5 * z * z) < 1e-16 * wmax) continue;
        w[m] = w[t];
        mu[m++] = mu[t];
    }
    w.resize(m);
    mu.resize(m);
    const double c = 1.0 / (sd * std::sqrt(2.0));
    double F0 = 0.0;
    for (std::size_t t = 0; t < m; ++t) F0 += w[t] * std::erfc(mu[t] * c);
    auto F = [&](double y) {
        double s = 0.0;
        for (std::size_t t = 0; t < m; ++t) s += w[t] * std::erfc((mu[t] - y) * c);
        return 0.5 * (s - F0);
    };
    auto f = [&](double y) {
        double s = 0.0;
        for (std::size_t t = 0; t < m; ++t) {
            const double z = (y - mu[t]) * c;
            s += w[t] * std::exp(-z * z);
        }
        return s * c / std::sqrt(pi);
    };
    const double total = F(pi);
    if (!(total > 0.0)) throw ConsistencyError(cat("slice sampler: nonpositive mass ", total));
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double u = U(rng), target = u * total;
    // start at the same quantile of the heaviest component
    std::size_t top = 0;
    for (std::size_t t = 1; t < m; ++t)
        if (w[t] > w[top]) top = t;
    double lo = 0.0, hi = pi, y = std::clamp(mu[top] + sd * std::sqrt(2.0) * boost::math::erf_inv(std::clamp(2 * u - 1, -0.999999, 0.999999)), 1e-3, pi - 1e-3);
    for (int it = 0; it < 200; ++it) {
        const double g = F(y) - target;
        if (g > 0) hi = y; else lo = y;
        const double d = f(y);
        double yn = d > 0 ? y - g / d : 0.5 * (lo + hi);
        if (!(yn > lo && yn < hi)) yn = 0.5 * (lo + hi);
        const bool done = std::abs(yn - y) < 1e-11 || hi - lo < 1e-11;
        y = yn;
        if (done) break;
    }
    return y;
}

/// One slice of n nonintersecting wall bridges: given positions x at the current
/// time, end points b after dt + tau, draw the positions y after dt (sorted).
/// Given x, the unordered y form a biorthogonal ensemble with kernel
/// sum_ij A_i(u) (G^{-1})_ji B_j(v), A_i = P(x_i, .; dt), B_j = P(., b_j; tau),
/// G = P(x, b; dt + tau). The points are drawn one at a time by the chain rule, each
/// conditional density being the Schur complement, itself a combination of the
/// products A_i B_j.
template <class Rng>
void sample_slice(BoundaryCondition bc, const double* x, const double* b, int n, double dt, double tau, int nd, Rng& rng, double* y) {
    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    MatL G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G(i, j) = heat_fast(bc, x[i], b[j], dt + tau, nd);
    const MatL M = G.inverse().transpose();
    const double sd = std::sqrt(dt * tau / ((dt + tau) * nd));
    std::vector<double> w, mu;
    for (int m = 0; m < n; ++m) {
        MatL C = M;
        if (m > 0) {
            MatL Phi(n, m), Psi(n, m);
            for (int i = 0; i < n; ++i)
                for (int a = 0; a < m; ++a) {
                    Phi(i, a) = heat_fast(bc, x[i], y[a], dt, nd);
                    Psi(i, a) = heat_fast(bc, y[a], b[i], tau, nd);
                }
            const MatL U = M * Psi, V = Phi.transpose() * M, Kyy = Phi.transpose() * M * Psi;
            C = M - U * Kyy.inverse() * V;
        }
        w.clear();
        mu.clear();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) bridge_terms(bc, x[i], b[j], dt, tau, nd, double(C(i, j)), w, mu);
        y[m] = invert_mixture(w, mu, sd, rng);
    }
    std::sort(y, y + n);
}

/// det[P(x_i, y_j)] / prod P(x_i, y_i): the probability that independent
/// particles moving x -> y do not meet in between (Karlin-McGregor).
inline double no_crossing_ratio(BoundaryCondition bc, const double* x, const double* y, int n, double dt, int nd) {
    for (int i = 1; i < n; ++i)
        if (!(y[i] > y[i - 1])) return 0.0;
    if (n == 1) return 1.0;
    double A[4][4];
    for (int i = 0; i < n; ++i) {
        const double d = heat_fast(bc, x[i], y[i], dt, nd);
        for (int j = 0; j < n; ++j) A[i][j] = (i == j ? d : heat_fast(bc, x[i], y[j], dt, nd)) / d;
    }
    // elimination with partial pivoting, n <= 4
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int p = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
        if (A[p][c] == 0.0) return 0.0;
        if (p != c) {
            for (int k = 0; k < n; ++k) std::swap(A[p][k], A[c][k]);
            det = -det;
        }
        det *= A[c][c];
        for (int r = c + 1; r < n; ++r) {
            const double f = A[r][c] / A[c][c];
            for (int k = c; k < n; ++k) A[r][k] -= f * A[c][k];
        }
    }
    return std::clamp(det, 0.0, 1.0);
}

struct ReplicaResult {
    std::vector<float> paths;
    std::size_t samples = 0;
    std::uint64_t attempts = 0;
};

inline ReplicaResult run_replica(BoundaryCondition bc, SamplerMethod method, int n, double T, int steps, double eps, std::size_t want,
                                 std::uint64_t seed, int replica) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(replica), 0x9e3779b9u};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    ReplicaResult out;
    out.paths.reserve(want * std::size_t(steps + 1) * n);
    const double dt = T / steps;
    std::vector<double> ends(n), cur(n), next(n), path(std::size_t(steps + 1) * n);
    for (int i = 0; i < n; ++i) ends[i] = eps * (i + 1);
    while (out.samples < want) {
        ++out.attempts;
        if ((out.attempts & 0xfffff) == 0 && double(out.samples) / double(out.attempts) < 1e-6)
            throw ConvergenceError(cat("sample_paths: acceptance ", double(out.samples) / double(out.attempts), " below 1e-6 after ", out.attempts,
                                       " proposals; increase eps (now ", eps, ") or use the skeleton method"));
        cur = ends;
        std::copy(cur.begin(), cur.end(), path.begin());
        bool alive = true;
        for (int k = 1; k <= steps && alive; ++k) {
            const double tau = T - k * dt;
            if (k == steps) {
                next = ends;
            } else if (method == SamplerMethod::skeleton) {
                sample_slice(bc, cur.data(), ends.data(), n, dt, tau, n, rng, next.data());
            } else {
                for (int i = 0; i < n; ++i) sample_slice(bc, &cur[i], &ends[i], 1, dt, tau, n, rng, &next[i]);
            }
            if (method == SamplerMethod::rejection && n > 1 && !(U(rng) < no_crossing_ratio(bc, cur.data(), next.data(), n, dt, n))) alive = false;
            if (bc == BoundaryCondition::absorb && k < steps)
                for (double p : next) alive = alive && p > 0.0 && p < pi;
            cur = next;
            std::copy(cur.begin(), cur.end(), path.begin() + std::size_t(k) * n);
        }
        if (!alive) continue;
        for (double p : path) out.paths.push_back(float(p));
        ++out.samples;
    }
    return out;
}

}  // namespace detail

/// Nonintersecting wall bridges from {eps i} back to {eps i}, i = 1..n, on a uniform
/// grid of steps + 1 slices. Replicas have their own generator streams seeded from
/// (seed, replica) and are merged in replica order, so the ensemble does not depend
/// on thread timing.
inline PathEnsemble sample_paths(BoundaryCondition bc, int n, double T, int steps, double eps, std::size_t n_samples, std::uint64_t seed,
                                 SamplerMethod method = SamplerMethod::rejection, int replicas = 4) {
    if (bc == BoundaryCondition::circle) throw DomainError("sample_paths: walls only (reflect, absorb)");
    if (n < 1 || n > 4) throw DomainError(detail::cat("sample_paths: n = ", n, " outside [1, 4]"));
    if (!(T > 0.0)) throw DomainError(detail::cat("sample_paths: T = ", T, " must be positive"));
    if (steps < 50) throw DomainError(detail::cat("sample_paths: steps = ", steps, " below 50"));
    if (!(eps > 0.0 && eps * n < pi)) throw DomainError(detail::cat("sample_paths: eps = ", eps, " must be positive with n eps < pi"));
    if (replicas < 1) throw DomainError("sample_paths: replicas must be >= 1");
    PathEnsemble ens;
    ens.bc = bc;
    ens.method = method;
    ens.n = n;
    ens.T = T;
    ens.steps = steps;
    ens.eps = eps;
    ens.seed = seed;
    std::vector<std::future<detail::ReplicaResult>> jobs;
    for (int r = 0; r < replicas; ++r) {
        const std::size_t want = n_samples / replicas + (std::size_t(r) < n_samples % replicas ? 1 : 0);
        jobs.push_back(std::async(std::launch::async, detail::run_replica, bc, method, n, T, steps, eps, want, seed, r));
    }
    ens.paths.reserve(n_samples * std::size_t(steps + 1) * n);
    for (auto& j : jobs) {
        auto r = j.get();
        ens.paths.insert(ens.paths.end(), r.paths.begin(), r.paths.end());
        ens.samples += r.samples;
        ens.attempts += r.attempts;
    }
    return ens;
}

/// Histogram of all particle positions at slice k: expected particles per unit
/// length in each bin, with the standard error from the per-sample counts.
struct Histogram {
    double lo = 0.0, hi = pi;
    std::vector<double> density, stderr_;
    double width() const { return (hi - lo) / density.size(); }
    double centre(int b) const { return lo + (b + 0.5) * width(); }
};

inline Histogram slice_histogram(const PathEnsemble& ens, int k, int bins, double lo = 0.0, double hi = pi) {
    if (k < 0 || k > ens.steps) throw DomainError(detail::cat("slice_histogram: slice ", k, " outside [0, ", ens.steps, "]"));
    if (bins < 1 || !(hi > lo)) throw DomainError("slice_histogram: need bins >= 1 and hi > lo");
    if (ens.samples == 0) throw DomainError("slice_histogram: empty ensemble");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    std::vector<double> sum(bins, 0.0), sum2(bins, 0.0), c(bins);
    const double w = (hi - lo) / bins;
    for (std::size_t s = 0; s < ens.samples; ++s) {
        std::fill(c.begin(), c.end(), 0.0);
        for (int i = 0; i < ens.n; ++i) {
            const double x = ens.at(s, k, i);
            if (x < lo || x > hi) continue;
            c[std::min(bins - 1, int((x - lo) / w))] += 1.0;
        }
        for (int b = 0; b < bins; ++b) {
            sum[b] += c[b];
            sum2[b] += c[b] * c[b];
        }
    }
    const double S = double(ens.samples);
    for (int b = 0; b < bins; ++b) {
        const double m = sum[b] / S;
        h.density.push_back(m / w);
        h.stderr_.push_back(std::sqrt(std::max(sum2[b] / S - m * m, 0.0) / S) / w);
    }
    return h;
}

/// Binned correlation estimate: mean over samples of prod_a N_a / |bin|^m, where N_a
/// counts particles within binwidth/2 of x_a at slice t_a. Bins on one slice must
/// be disjoint, so the product only pairs distinct particles.
struct CorrelationEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::vector<std::string> warnings;
};

inline CorrelationEstimate empirical_correlation(const PathEnsemble& ens, const std::vector<SpaceTimePoint>& pts, double binwidth) {
    if (pts.empty()) throw DomainError("empirical_correlation: no points");
    if (!(binwidth > 0.0)) throw DomainError("empirical_correlation: binwidth must be positive");
    if (ens.samples == 0) throw DomainError("empirical_correlation: empty ensemble");
    std::vector<int> slice;
    for (const auto& p : pts) {
        const double kf = p.t / ens.T * ens.steps;
        const int k = int(std::lround(kf));
        if (std::abs(kf - k) > 1e-9 || k < 0 || k > ens.steps) throw DomainError(detail::cat("empirical_correlation: t = ", p.t, " is not a stored slice"));
        if (p.x < 0.0 || p.x > pi) throw DomainError(detail::cat("empirical_correlation: x = ", p.x, " outside [0, pi]"));
        for (std::size_t b = 0; b < slice.size(); ++b)
            if (slice[b] == k && std::abs(pts[b].x - p.x) < binwidth) throw DomainError("empirical_correlation: overlapping bins on one slice");
        slice.push_back(k);
    }
    // bins cut by a wall are shortened to the part inside [0, pi]
    double vol = 1.0;
    for (const auto& p : pts) vol *= std::min(pi, p.x + binwidth / 2) - std::max(0.0, p.x - binwidth / 2);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t s = 0; s < ens.samples; ++s) {
        double prod = 1.0;
        for (std::size_t a = 0; a < pts.size() && prod > 0; ++a) {
            int c = 0;
            for (int i = 0; i < ens.n; ++i) c += std::abs(ens.at(s, slice[a], i) - pts[a].x) < binwidth / 2;
            prod *= c;
        }
        sum += prod;
        sum2 += prod * prod;
    }
    const double S = double(ens.samples), mean = sum / S;
    CorrelationEstimate out;
    out.estimate = mean / vol;
    out.stderr_ = std::sqrt(std::max(sum2 / S - mean * mean, 0.0) / S) / vol;
    if (sum == 0.0) out.warnings.push_back("no sample hit every bin; estimate and error are zero");
    return out;
}

/// Ensemble file: one JSON header line, then the f32 path array.
inline void save_ensemble(const PathEnsemble& e, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("save_ensemble: cannot open " + path);
    nlohmann::json hdr = {{"bc", to_string(e.bc)}, {"method", to_string(e.method)}, {"n", e.n},         {"T", e.T},
                          {"steps", e.steps},      {"eps", e.eps},     {"seed", e.seed},
                          {"samples", e.samples},  {"attempts", e.attempts}, {"layout", "f32 le [sample][slice][particle]"}};
    out << hdr.dump() << '\n';
    out.write(reinterpret_cast<const char*>(e.paths.data()), std::streamsize(e.paths.size() * sizeof(float)));
}

inline PathEnsemble load_ensemble(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("load_ensemble: cannot open " + path);
    std::string line;
    std::getline(in, line);
    const auto h = nlohmann::json::parse(line);
    PathEnsemble e;
    e.bc = parse_bc(h.at("bc").get<std::string>());
    e.method = parse_method(h.at("method").get<std::string>());
    e.n = h.at("n");
    e.T = h.at("T");
    e.steps = h.at("steps");
    e.eps = h.at("eps");
    e.seed = h.at("seed");
    e.samples = h.at("samples");
    e.attempts = h.at("attempts");
    e.paths.resize(e.samples * std::size_t(e.steps + 1) * e.n);
    in.read(reinterpret_cast<char*>(e.paths.data()), std::streamsize(e.paths.size() * sizeof(float)));
    if (!in) throw DomainError("load_ensemble: truncated file " + path);
    return e;
}

}  // namespace wallbridge
