#pragma once

#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "finite_process.hpp"
#include "limit_kernels.hpp"
#include "specfun.hpp"

namespace wallbridge {

/// Supercritical parametrization T = 2 K~ E~ with k~ = 2 sqrt(k) / (1 + k).
/// d needs an external alpha, which is not defined alongside these formulas;
/// without one d stays empty.
struct EllipticParams {
    double k = 0.0;
    double k_tilde = 0.0;
    double K = 0.0, E = 0.0;
    double K_tilde = 0.0, E_tilde = 0.0;
    double T = 0.0;
    double t_c = 0.0;
    std::optional<double> alpha;
    std::optional<double> d;
};

inline double k_tilde_of(double k) { return 2 * std::sqrt(k) / (1 + k); }

/// Complementary modulus of k~, exactly (1 - k) / (1 + k).
inline double k_tilde_complement(double k) { return (1 - k) / (1 + k); }

inline double T_of_k(double k) {
    if (!(k > 0.0 && k < 1.0)) throw DomainError(detail::cat("T_of_k: k = ", k, " outside (0, 1)"));
    const auto e = elliptic_KE_complement(k_tilde_complement(k));
    return 2 * e.K * e.E;
}

/// d^4 = ((1 + k^2) E - (1 - k^2) K) / (6 alpha^3).
inline double d_of(double k, double alpha) {
    if (!(alpha > 0.0)) throw DomainError(detail::cat("d_of: alpha = ", alpha, " must be positive"));
    const auto e = elliptic_KE(k);
    return std::pow(((1 + k * k) * e.E - (1 - k * k) * e.K) / (6 * alpha * alpha * alpha), 0.25);
}

inline EllipticParams elliptic_params(double k, std::optional<double> alpha = {}) {
    if (!(k > 0.0 && k < 1.0)) throw DomainError(detail::cat("elliptic_params: k = ", k, " outside (0, 1)"));
    EllipticParams p;
    p.k = k;
    p.k_tilde = k_tilde_of(k);
    const auto e = elliptic_KE(k), et = elliptic_KE_complement(k_tilde_complement(k));
    p.K = e.K;
    p.E = e.E;
    p.K_tilde = et.K;
    p.E_tilde = et.E;
    p.T = 2 * et.K * et.E;
    const double kt2 = p.k_tilde * p.k_tilde, kp = k_tilde_complement(k);
    p.t_c = 2 / kt2 * et.E * (et.E - kp * kp * et.K);
    p.alpha = alpha;
    if (alpha) p.d = d_of(k, *alpha);
    return p;
}

/// Bisection in k on T(k), which increases from pi^2/2 at k = 0 to infinity at k = 1.
inline EllipticParams solve_k(double T, std::optional<double> alpha = {}) {
    if (!(T > pi * pi / 2)) throw DomainError(detail::cat("solve_k: T = ", T, " must exceed pi^2/2"));
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= 0.0 || mid >= 1.0) break;
        (T_of_k(mid) < T ? lo : hi) = mid;
    }
    const double k = 0.5 * (lo + hi);
    if (!(k > 0.0 && k < 1.0)) throw ConvergenceError(detail::cat("solve_k: T = ", T, " beyond the representable k range"));
    return elliptic_params(k, alpha);
}

enum class ConvergeCase { pearcey_reflect, pearcey_absorb, tac_reflect, tac_absorb };

inline const char* to_string(ConvergeCase c) {
    switch (c) {
        case ConvergeCase::pearcey_reflect: return "pearcey_reflect";
        case ConvergeCase::pearcey_absorb: return "pearcey_absorb";
        case ConvergeCase::tac_reflect: return "tac_reflect";
        case ConvergeCase::tac_absorb: return "tac_absorb";
    }
    return "?";
}

inline ConvergeCase parse_case(const std::string& s) {
    for (auto c : {ConvergeCase::pearcey_reflect, ConvergeCase::pearcey_absorb, ConvergeCase::tac_reflect, ConvergeCase::tac_absorb})
        if (s == to_string(c)) return c;
    throw DomainError("unknown convergence case '" + s + "' (pearcey_reflect, pearcey_absorb, tac_reflect, tac_absorb)");
}

inline bool is_tacnode(ConvergeCase c) { return c == ConvergeCase::tac_reflect || c == ConvergeCase::tac_absorb; }

inline BoundaryCondition case_bc(ConvergeCase c) {
    return c == ConvergeCase::pearcey_reflect || c == ConvergeCase::tac_reflect ? BoundaryCondition::reflect : BoundaryCondition::absorb;
}

inline Parity case_parity(ConvergeCase c) { return case_bc(c) == BoundaryCondition::reflect ? Parity::even : Parity::odd; }

struct ScaledPoint {
    double tau_i, tau_j, xi, eta;
};

/// Four points with |xi|, |eta| <= 2 and |tau| <= 1, both time orders present.
inline std::vector<ScaledPoint> default_grid() { return {{0, 0, 0.5, 1.0}, {-0.5, 0.5, 0.3, 0.8}, {0.5, -0.5, 1.0, 0.4}, {0.2, 0.2, 1.5, 1.5}}; }

/// Critical d for the tacnode scalings.
inline const double tacnode_d = std::pow(2.0, -5.0 / 3.0) * pi;

/// Physical (t_i, t_j, x, y), the total time and the Jacobian |dy/deta| for one
/// scaled point at particle number n.
struct ScaledMap {
    double T, ti, tj, x, y, jac;
};

inline ScaledMap scale_point(ConvergeCase c, int n, double T_or_sigma, double d, double t_c, const ScaledPoint& p) {
    if (!(p.xi >= 0 && p.eta >= 0)) throw DomainError(detail::cat("scale_point: xi, eta must be >= 0 (wall at pi), got ", p.xi, ", ", p.eta));
    ScaledMap m{};
    if (is_tacnode(c)) {
        m.T = pi * pi / 2 * (1 - std::pow(2.0, -2.0 / 3) * T_or_sigma * std::pow(2.0 * n, -2.0 / 3));
        const double ts = d * d / (std::pow(2.0, 4.0 / 3) * std::cbrt(double(n)));
        m.jac = d / std::pow(2.0 * n, 2.0 / 3);
        m.ti = m.T / 2 + ts * p.tau_i;
        m.tj = m.T / 2 + ts * p.tau_j;
    } else {
        m.T = T_or_sigma;
        const double ts = d * d / (std::pow(2.0, 1.5) * std::sqrt(double(n)));
        m.jac = d / std::pow(2.0 * n, 0.75);
        m.ti = t_c + ts * p.tau_i;
        m.tj = t_c + ts * p.tau_j;
    }
    m.x = pi - m.jac * p.xi;
    m.y = pi - m.jac * p.eta;
    if (!(m.ti > 0 && m.ti < m.T && m.tj > 0 && m.tj < m.T && m.x > 0 && m.y > 0))
        throw DomainError(detail::cat("scale_point: n = ", n, " too small for this grid point"));
    return m;
}

/// Limit kernel at a scaled point. Pearcey cases carry the time order
/// (-tau_j, -tau_i) and, following the circle limit K^P_{-tau_j,-tau_i}(eta, xi),
/// the spatial order (eta, xi). The Pearcey kernel is not symmetric in its two
/// spatial variables, so the (xi, eta) order is a different kernel; it is kept
/// behind pearcey_xi_eta for comparison.
inline double limit_value(ConvergeCase c, const ScaledPoint& p, double sigma, const TacnodeContext* ctx, bool pearcey_xi_eta = false) {
    if (is_tacnode(c)) {
        if (!ctx) throw DomainError("limit_value: tacnode cases need a TacnodeContext");
        return tacnode_parity(*ctx, case_parity(c), p.tau_i, p.tau_j, p.xi, p.eta, sigma).value;
    }
    return pearcey_xi_eta ? pearcey_parity(case_parity(c), -p.tau_j, -p.tau_i, p.xi, p.eta).value
                          : pearcey_parity(case_parity(c), -p.tau_j, -p.tau_i, p.eta, p.xi).value;
}

struct ConvergeRow {
    int n = 0;
    double T = 0.0;
    double sup_error = 0.0;
    std::vector<double> finite;  ///< K_n |dy/deta| per grid point
};

struct ConvergeReport {
    ConvergeCase which{};
    double T_or_sigma = 0.0;
    double d = 0.0;
    std::string d_source;  ///< critical, user or calibrated
    double t_c = 0.0;      ///< Pearcey cases only
    std::vector<ScaledPoint> grid;
    std::vector<double> limit;
    std::vector<ConvergeRow> rows;

    bool strictly_decreasing() const {
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (!(rows[i].sup_error < rows[i - 1].sup_error)) return false;
        return rows.size() >= 2;
    }
};

namespace detail {

inline ConvergeRow converge_row(ConvergeCase c, int n, const std::vector<ScaledPoint>& grid, const std::vector<double>& limit, double T_or_sigma,
                                double d, double t_c) {
    ConvergeRow row;
    row.n = n;
    row.T = scale_point(c, n, T_or_sigma, d, t_c, grid.front()).T;
    const FiniteKernel K(case_bc(c), n, row.T);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto m = scale_point(c, n, T_or_sigma, d, t_c, grid[i]);
        row.finite.push_back(K(m.ti, m.tj, m.x, m.y) * m.jac);
        row.sup_error = std::max(row.sup_error, std::abs(row.finite.back() - limit[i]));
    }
    return row;
}

}  // namespace detail

/// Least-squares d for a Pearcey case at a single n: coarse scan on [0.2, 5],
/// then golden section around the best cell.
inline double calibrate_d(ConvergeCase c, int n, const std::vector<ScaledPoint>& grid, double T) {
    if (is_tacnode(c)) throw DomainError("calibrate_d: tacnode cases use the critical d");
    const auto ep = solve_k(T);
    std::vector<double> limit;
    for (const auto& p : grid) limit.push_back(limit_value(c, p, 0.0, nullptr));
    const FiniteKernel K(case_bc(c), n, T);
    auto cost = [&](double d) {
        double s = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto m = scale_point(c, n, T, d, ep.t_c, grid[i]);
            const double r = K(m.ti, m.tj, m.x, m.y) * m.jac - limit[i];
            s += r * r;
        }
        return s;
    };
    const int N = 48;
    double best = 1e300, d_best = 0.0, step = (5.0 - 0.2) / N;
    for (int i = 0; i <= N; ++i) {
        const double d = 0.2 + i * step;
        double f;
        try {
            f = cost(d);
        } catch (const DomainError&) {
            continue;
        }
        if (f < best) best = f, d_best = d;
    }
    if (d_best == 0.0) throw DomainError(detail::cat("calibrate_d: n = ", n, " too small for the grid at every d"));
    double a = std::max(0.2, d_best - step), b = d_best + step;
    const double g = (std::sqrt(5.0) - 1) / 2;
    double x1 = b - g * (b - a), x2 = a + g * (b - a), f1 = cost(x1), f2 = cost(x2);
    while (b - a > 1e-6) {
        if (f1 < f2) {
            b = x2, x2 = x1, f2 = f1, x1 = b - g * (b - a), f1 = cost(x1);
        } else {
            a = x1, x1 = x2, f1 = f2, x2 = a + g * (b - a), f2 = cost(x2);
        }
    }
    return 0.5 * (a + b);
}

/// Sup-norm error of the scaled finite kernel against its limit on the grid, one
/// row per n. Tacnode cases take sigma and the critical d; Pearcey cases take T
/// and an explicit d, or calibrate it at the largest n when d is empty.
/// Rows are computed concurrently.
inline ConvergeReport converge_check(ConvergeCase c, const std::vector<int>& n_list, const std::vector<ScaledPoint>& grid, double T_or_sigma,
                                     std::optional<double> d = {}, const TacnodeContext* ctx = nullptr) {
    if (n_list.empty() || grid.empty()) throw DomainError("converge_check: empty n list or grid");
    ConvergeReport rep;
    rep.which = c;
    rep.T_or_sigma = T_or_sigma;
    rep.grid = grid;
    if (is_tacnode(c)) {
        rep.d = d.value_or(tacnode_d);
        rep.d_source = d ? "user" : "critical";
    } else {
        rep.t_c = solve_k(T_or_sigma).t_c;
        if (d) {
            rep.d = *d;
            rep.d_source = "user";
        } else {
            int nmax = n_list.front();
            for (int n : n_list) nmax = std::max(nmax, n);
            rep.d = calibrate_d(c, nmax, grid, T_or_sigma);
            rep.d_source = "calibrated";
        }
    }
    for (const auto& p : grid) rep.limit.push_back(limit_value(c, p, T_or_sigma, ctx));
    std::vector<std::future<ConvergeRow>> jobs;
    for (int n : n_list)
        jobs.push_back(std::async(std::launch::async, detail::converge_row, c, n, std::cref(rep.grid), std::cref(rep.limit), T_or_sigma, rep.d, rep.t_c));
    for (auto& j : jobs) rep.rows.push_back(j.get());
    return rep;
}

inline nlohmann::json to_json(const EllipticParams& p) {
    nlohmann::json j = {{"k", p.k}, {"k_tilde", p.k_tilde}, {"K", p.K}, {"E", p.E}, {"K_tilde", p.K_tilde}, {"E_tilde", p.E_tilde}, {"T", p.T}, {"t_c", p.t_c}};
    if (p.d) {
        j["d"] = *p.d;
        j["alpha"] = *p.alpha;
        j["d_status"] = "computed from user alpha";
    } else {
        j["d"] = nullptr;
        j["d_status"] = "undefined: alpha in the d formula is not specified; pass --alpha or calibrate";
    }
    return j;
}

inline nlohmann::json to_json(const ConvergeReport& r) {
    nlohmann::json grid = nlohmann::json::array(), rows = nlohmann::json::array();
    for (const auto& p : r.grid) grid.push_back({{"tau_i", p.tau_i}, {"tau_j", p.tau_j}, {"xi", p.xi}, {"eta", p.eta}});
    for (const auto& row : r.rows)
        rows.push_back({{"case", to_string(r.which)}, {"n", row.n}, {"T", row.T}, {"sup_error", row.sup_error}, {"finite", row.finite}});
    nlohmann::json params = {{"d", r.d}, {"d_source", r.d_source}};
    params[is_tacnode(r.which) ? "sigma" : "T"] = r.T_or_sigma;
    if (!is_tacnode(r.which)) params["t_c"] = r.t_c;
    return {{"case", to_string(r.which)}, {"grid", grid}, {"limit", r.limit}, {"rows", rows}, {"params", params}, {"strictly_decreasing", r.strictly_decreasing()}};
}

}  // namespace wallbridge
