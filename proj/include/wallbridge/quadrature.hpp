#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "core.hpp"

namespace wallbridge {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> x, w;
};

inline GaussLegendre make_gauss_legendre(int n) {
    GaussLegendre g;
    g.x.resize(n);
    g.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5)), dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        g.x[i] = -z;
        g.x[n - 1 - i] = z;
        g.w[i] = g.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return g;
}

inline const GaussLegendre& gauss_legendre(int n) {
    static const GaussLegendre g24 = make_gauss_legendre(24);
    static const GaussLegendre g12 = make_gauss_legendre(12);
    if (n == 24) return g24;
    if (n == 12) return g12;
    throw DomainError(detail::cat("gauss_legendre: only orders 12 and 24 are cached, asked ", n));
}

/// Ray z = origin + direction * r, r in [0, R]. orientation +1 runs outward, -1 inward.
struct Ray {
    cplx origin;
    cplx direction;
    int orientation;
};

struct ContourSpec {
    std::vector<Ray> rays;
    double truncation_radius = 1.0;
    bool graded_near_origin = false;
};

struct PanelOptions {
    int panels_per_ray = 4;
    double grading_ratio = 0.25;
    double min_scale = 1e-12;  ///< relative size of the innermost graded panel
};

/// Panelised Gauss rule on a ContourSpec. The coarse (12-point) companion on
/// the same panels feeds the error estimate.
struct QuadratureRule {
    std::vector<cplx> nodes, weights;
    std::vector<cplx> check_nodes, check_weights;
    std::vector<int> ray;        ///< ray index of every node
    std::vector<double> radius;  ///< ray parameter of every node
    std::vector<int> check_ray;
    std::vector<double> check_radius;
    int panel_count = 0;
    double est_tail = 0.0;
    double roundoff_scale = 0.0;
};

inline void validate(const ContourSpec& c) {
    detail::require(c.truncation_radius > 0.0, "ContourSpec: truncation_radius must be positive");
    for (const auto& r : c.rays) {
        detail::require(std::abs(std::abs(r.direction) - 1.0) < 1e-12, "ContourSpec: ray direction must have unit modulus");
        detail::require(r.orientation == 1 || r.orientation == -1, "ContourSpec: orientation must be +1 or -1");
    }
}

/// Panel breakpoints on [0, R] for one ray.
inline std::vector<double> ray_breakpoints(double R, bool graded, const PanelOptions& opt) {
    std::vector<double> b;
    const int np = std::max(1, opt.panels_per_ray);
    if (graded) {
        const double first = R / np;
        std::vector<double> inner;
        for (double r = first * opt.grading_ratio; r > first * opt.min_scale; r *= opt.grading_ratio) inner.push_back(r);
        b.push_back(0.0);
        for (auto it = inner.rbegin(); it != inner.rend(); ++it) b.push_back(*it);
    } else {
        b.push_back(0.0);
    }
    for (int k = 1; k <= np; ++k) b.push_back(R * k / np);
    return b;
}

inline QuadratureRule build_rule(const ContourSpec& c, const PanelOptions& opt = {}, double est_tail = 0.0) {
    validate(c);
    const auto& g = gauss_legendre(24);
    const auto& h = gauss_legendre(12);
    QuadratureRule q;
    q.est_tail = est_tail;
    for (std::size_t ri = 0; ri < c.rays.size(); ++ri) {
        const Ray& ray = c.rays[ri];
        const auto b = ray_breakpoints(c.truncation_radius, c.graded_near_origin, opt);
        for (std::size_t p = 0; p + 1 < b.size(); ++p) {
            const double mid = 0.5 * (b[p] + b[p + 1]), half = 0.5 * (b[p + 1] - b[p]);
            for (std::size_t j = 0; j < g.x.size(); ++j) {
                const double r = mid + half * g.x[j];
                q.nodes.push_back(ray.origin + ray.direction * r);
                q.weights.push_back(double(ray.orientation) * ray.direction * (half * g.w[j]));
                q.ray.push_back(int(ri));
                q.radius.push_back(r);
            }
            for (std::size_t j = 0; j < h.x.size(); ++j) {
                const double r = mid + half * h.x[j];
                q.check_nodes.push_back(ray.origin + ray.direction * r);
                q.check_weights.push_back(double(ray.orientation) * ray.direction * (half * h.w[j]));
                q.check_ray.push_back(int(ri));
                q.check_radius.push_back(r);
            }
            ++q.panel_count;
        }
    }
    return q;
}

struct Integral {
    cplx value;
    double err;
};

template <class F>
Integral integrate_contour(const QuadratureRule& rule, F&& f) {
    cplx fine = 0.0, coarse = 0.0;
    double mass = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const cplx v = f(rule.nodes[i]);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw ConvergenceError(detail::cat("integrate_contour: non-finite integrand at node ", rule.nodes[i]));
        fine += rule.weights[i] * v;
        mass += std::abs(rule.weights[i] * v);
    }
    for (std::size_t i = 0; i < rule.check_nodes.size(); ++i) coarse += rule.check_weights[i] * f(rule.check_nodes[i]);
    return {fine, std::abs(fine - coarse) + rule.est_tail + 4e-16 * mass};
}

/// Smallest r past the peak of log_bound where it has dropped by ln(1/eps).
template <class F>
double decay_radius(F&& log_bound, double eps = 1e-16, double rmax = 200.0) {
    const double dr = 1e-3 * std::max(1.0, rmax / 200.0);
    double peak = log_bound(0.0), r = 0.0;
    for (double x = dr; x <= rmax; x += dr) peak = std::max(peak, log_bound(x));
    const double target = peak + std::log(eps);
    double last_above = 0.0;
    for (r = 0.0; r <= rmax; r += dr)
        if (log_bound(r) >= target) last_above = r;
    if (last_above + dr > rmax) throw ConvergenceError("decay_radius: integrand bound does not decay within rmax");
    return last_above + dr;
}

/// Integral of exp(log_bound) over [R, 3R]; a crude tail estimate for a truncated ray.
template <class F>
double tail_estimate(F&& log_bound, double R) {
    const int m = 200;
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += std::exp(log_bound(R + (k + 0.5) * 2.0 * R / m));
    return s * 2.0 * R / m;
}

/// Adaptive panel bisection on every ray until the summed 24-vs-12 point
/// differences fall below tol.
template <class F>
Integral integrate_adaptive(const ContourSpec& c, F&& f, double tol, int max_panels = 4000) {
    validate(c);
    const auto& g = gauss_legendre(24);
    const auto& h = gauss_legendre(12);
    struct Panel {
        int ray;
        double a, b;
        cplx value;
        double err;
        bool operator<(const Panel& o) const { return err < o.err; }
    };
    auto eval = [&](int ri, double a, double b) {
        const Ray& ray = c.rays[ri];
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        const cplx jac = double(ray.orientation) * ray.direction * half;
        cplx v24 = 0.0, v12 = 0.0;
        for (std::size_t j = 0; j < g.x.size(); ++j) v24 += g.w[j] * f(ray.origin + ray.direction * (mid + half * g.x[j]));
        for (std::size_t j = 0; j < h.x.size(); ++j) v12 += h.w[j] * f(ray.origin + ray.direction * (mid + half * h.x[j]));
        v24 *= jac;
        v12 *= jac;
        if (!std::isfinite(v24.real()) || !std::isfinite(v24.imag()))
            throw ConvergenceError(detail::cat("integrate_adaptive: non-finite integrand on ray ", ri, " panel [", a, ", ", b, "]"));
        return Panel{ri, a, b, v24, std::abs(v24 - v12)};
    };
    std::priority_queue<Panel> heap;
    for (int ri = 0; ri < int(c.rays.size()); ++ri) {
        const auto b = ray_breakpoints(c.truncation_radius, c.graded_near_origin, PanelOptions{});
        for (std::size_t p = 0; p + 1 < b.size(); ++p) heap.push(eval(ri, b[p], b[p + 1]));
    }
    auto total = [&] {
        auto copy = heap;
        cplx v = 0.0;
        double e = 0.0;
        while (!copy.empty()) {
            v += copy.top().value;
            e += copy.top().err;
            copy.pop();
        }
        return Integral{v, e};
    };
    Integral cur = total();
    while (cur.err > tol && int(heap.size()) < max_panels) {
        const Panel worst = heap.top();
        heap.pop();
        const double m = 0.5 * (worst.a + worst.b);
        heap.push(eval(worst.ray, worst.a, m));
        heap.push(eval(worst.ray, m, worst.b));
        cur = total();
    }
    if (cur.err > tol) throw ConvergenceError(detail::cat("integrate_adaptive: error ", cur.err, " above tolerance ", tol));
    return cur;
}

/// The four-ray contour X: e^{i pi/4} inf -> 0, e^{5 i pi/4} inf -> 0, 0 -> e^{3 i pi/4} inf, 0 -> e^{7 i pi/4} inf.
inline ContourSpec contour_X(double R, cplx apex_shift = 0.0) {
    const auto e = [](double a) { return std::polar(1.0, a); };
    ContourSpec c;
    c.rays = {{apex_shift, e(pi / 4), -1}, {apex_shift, e(3 * pi / 4), 1},
              {-apex_shift, e(5 * pi / 4), -1}, {-apex_shift, e(7 * pi / 4), 1}};
    c.truncation_radius = R;
    c.graded_near_origin = apex_shift == 0.0;
    return c;
}

/// C: e^{i pi/4} inf -> 0 -> e^{-i pi/4} inf.
inline ContourSpec contour_C(double R, double apex_shift = 0.0) {
    ContourSpec c;
    c.rays = {{apex_shift, std::polar(1.0, pi / 4), -1}, {apex_shift, std::polar(1.0, -pi / 4), 1}};
    c.truncation_radius = R;
    c.graded_near_origin = apex_shift == 0.0;
    return c;
}

/// Sigma_T as two wedges with apexes at +i h and -i h.
inline ContourSpec contour_sigma_T(double R, double h = 0.5) {
    const auto e = [](double a) { return std::polar(1.0, a); };
    ContourSpec c;
    c.rays = {{cplx(0, h), e(pi / 6), -1}, {cplx(0, h), e(5 * pi / 6), 1},
              {cplx(0, -h), e(7 * pi / 6), -1}, {cplx(0, -h), e(11 * pi / 6), 1}};
    c.truncation_radius = R;
    c.graded_near_origin = false;
    return c;
}

/// The real line as two rays out of 0.
inline ContourSpec contour_real_line(double R, bool graded = true) {
    ContourSpec c;
    c.rays = {{0.0, -1.0, -1}, {0.0, 1.0, 1}};
    c.truncation_radius = R;
    c.graded_near_origin = graded;
    return c;
}

inline ContourSpec contour_half_line(double R, bool graded = true) {
    ContourSpec c;
    c.rays = {{0.0, 1.0, 1}};
    c.truncation_radius = R;
    c.graded_near_origin = graded;
    return c;
}

}  // namespace wallbridge
