/// wallbridge: command-line access to the evaluators and checks.
/// Data goes to --out (or stdout); the one-line summary goes to stdout, or to
/// stderr when the data itself is on stdout.
/// Exit codes: 0 success, 1 failed check or numerical failure, 2 usage error.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wallbridge/wallbridge.hpp"
#include "wallbridge/verify.hpp"

using namespace wallbridge;
using nlohmann::json;

namespace {

/// Thrown by a command whose check did not pass; already reported.
struct CheckFailed {};

class Output {
public:
    explicit Output(const std::string& path) : path_(path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw DomainError("cannot open output file " + path);
        }
    }
    std::ostream& data() { return path_.empty() ? std::cout : file_; }
    std::ostream& info() { return path_.empty() ? std::cerr : std::cout; }
    void summary(const std::string& line) {
        data().flush();
        info() << line << (path_.empty() ? "" : " -> " + path_) << '\n';
    }

private:
    std::string path_;
    std::ofstream file_;
};

std::string fmt(double v) { return io::num(v); }

/// JSON config values become flags placed before the command line ones; a key
/// given on the command line is skipped so the flag wins.
std::vector<std::string> apply_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + i);
            break;
        }
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot read " + path);
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::exception& e) {
        throw CLI::ValidationError("--config", std::string(e.what()));
    }
    if (!cfg.is_object()) throw CLI::ValidationError("--config", "top level must be an object");
    std::set<std::string> given;
    for (const auto& a : args)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
    // after the subcommand name, which is the first bare word
    auto at = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.empty() || a[0] != '-'; });
    if (at == args.end() && cfg.contains("command")) {
        args.insert(args.begin(), cfg["command"].get<std::string>());
        at = args.begin();
    }
    if (at == args.end()) throw CLI::ValidationError("--config", "no subcommand given");
    std::vector<std::string> extra;
    auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    for (const auto& [key, v] : cfg.items()) {
        if (key == "command" || given.count(key)) continue;
        if (v.is_boolean()) {
            if (v.get<bool>()) extra.push_back("--" + key);
            continue;
        }
        extra.push_back("--" + key);
        if (v.is_array())
            for (const auto& e : v) extra.push_back(scalar(e));
        else
            extra.push_back(scalar(v));
    }
    args.insert(at + 1, extra.begin(), extra.end());
    return args;
}

std::vector<double> grid_points(BoundaryCondition bc, int G, std::optional<double> lo, std::optional<double> hi) {
    const double a = lo.value_or(bc == BoundaryCondition::circle ? -pi : 0.0), b = hi.value_or(pi);
    if (G < 1 || !(b > a)) throw DomainError(detail::cat("grid: need grid >= 1 and hi > lo, got ", G, " on [", a, ", ", b, "]"));
    std::vector<double> x(G);
    for (int i = 0; i < G; ++i) x[i] = a + (i + 0.5) * (b - a) / G;
    return x;
}

/// Matrix CSV: header y=<value> per column, row i at x_i = the same grid.
void write_matrix(std::ostream& out, const std::vector<double>& g, const std::function<double(double, double)>& f) {
    std::vector<std::string> header;
    for (double y : g) header.push_back("y=" + fmt(y));
    std::vector<std::vector<double>> rows;
    for (double x : g) {
        rows.emplace_back();
        for (double y : g) rows.back().push_back(f(x, y));
    }
    io::write_csv(out, header, rows);
}

void check_format(const std::string& f) {
    if (f != "csv" && f != "json") throw DomainError("--format must be csv or json, got " + f);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wallbridge: nonintersecting Brownian bridges between walls"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "all subcommands");
    std::map<CLI::App*, std::function<void()>> run;

    std::string out, format = "csv";
    auto common = [&](CLI::App* s, bool has_format) {
        s->add_option("--out", out, "output file (default stdout)");
        if (has_format) s->add_option("--format", format, "csv or json")->capture_default_str();
    };

    // ops
    {
        auto* s = app.add_subcommand("ops", "recurrence coefficients and norms of the discrete Gaussian polynomials");
        auto n = std::make_shared<int>(), kmax = std::make_shared<int>(-1);
        auto T = std::make_shared<double>();
        s->add_option("--n", *n, "lattice Z/n")->required();
        s->add_option("--T", *T, "weight e^{-nTs^2/2}")->required();
        s->add_option("--kmax", *kmax, "highest degree (default 2n)");
        common(s, true);
        run[s] = [=, &out, &format] {
            check_format(format);
            const auto sys = build_system(*n, *T, *kmax < 0 ? 2 * *n : *kmax);
            const double res = orthogonality_residual(sys);
            Output o(out);
            if (format == "json") {
                o.data() << json{{"n", sys.n}, {"T", sys.T}, {"kmax", sys.kmax}, {"b", sys.b}, {"h", sys.h},
                                 {"lattice_cutoff", sys.lattice_cutoff}, {"extended_precision", sys.extended_precision},
                                 {"orthogonality_residual", res}}.dump(2)
                         << '\n';
            } else {
                std::vector<std::vector<double>> rows;
                for (int k = 0; k <= sys.kmax; ++k) rows.push_back({double(k), sys.b[k], sys.h[k]});
                io::write_csv(o.data(), {"k", "b", "h"}, rows);
            }
            o.summary(detail::cat("ops: n = ", sys.n, " T = ", sys.T, " degrees 0..", sys.kmax, ", max normalized cross product ", res));
        };
    }

    // kernel
    {
        auto* s = app.add_subcommand("kernel", "finite-n extended kernel K_{ti,tj}(x,y) on a grid x grid");
        auto bc = std::make_shared<std::string>();
        auto n = std::make_shared<int>(), G = std::make_shared<int>(16);
        auto T = std::make_shared<double>(), ti = std::make_shared<double>(), tj = std::make_shared<double>();
        auto lo = std::make_shared<std::optional<double>>(), hi = std::make_shared<std::optional<double>>();
        s->add_option("--bc", *bc, "reflect, absorb or circle")->required();
        s->add_option("--n", *n)->required();
        s->add_option("--T", *T)->required();
        s->add_option("--ti", *ti)->required();
        s->add_option("--tj", *tj)->required();
        s->add_option("--grid", *G, "points per axis, cell centres")->capture_default_str();
        s->add_option("--lo", *lo, "grid start (default the domain edge)");
        s->add_option("--hi", *hi, "grid end");
        common(s, true);
        run[s] = [=, &out, &format] {
            check_format(format);
            const auto b = parse_bc(*bc);
            const FiniteKernel K(b, *n, *T);
            const auto g = grid_points(b, *G, *lo, *hi);
            Output o(out);
            auto f = [&](double x, double y) { return K(*ti, *tj, x, y); };
            if (format == "json") {
                json m = json::array();
                for (double x : g) {
                    json row = json::array();
                    for (double y : g) row.push_back(f(x, y));
                    m.push_back(row);
                }
                o.data() << json{{"bc", *bc}, {"n", *n}, {"T", *T}, {"ti", *ti}, {"tj", *tj}, {"grid", g}, {"K", m}}.dump(2) << '\n';
            } else {
                write_matrix(o.data(), g, f);
            }
            o.summary(detail::cat("kernel: ", *bc, " n = ", *n, " T = ", *T, " at (", *ti, ", ", *tj, "), ", *G, " x ", *G));
        };
    }

    // limit
    {
        auto* s = app.add_subcommand("limit", "limiting kernels: Pearcey, tacnode and their even/odd and hard-edge forms");
        auto kind = std::make_shared<std::string>();
        auto sv = std::make_shared<double>(0.0), tv = std::make_shared<double>(0.0), xi = std::make_shared<double>(0.5),
             eta = std::make_shared<double>(0.5), sigma = std::make_shared<double>(0.0), alpha = std::make_shared<double>(-0.5);
        auto G = std::make_shared<int>(0);
        auto lo = std::make_shared<double>(0.1), hi = std::make_shared<double>(2.0);
        s->add_option("--kernel", *kind, "pearcey, pearcey-even, pearcey-odd, hard-pearcey, tacnode, tacnode-even, tacnode-odd, hard-tacnode")
            ->required()
            ->check(CLI::IsMember({"pearcey", "pearcey-even", "pearcey-odd", "hard-pearcey", "tacnode", "tacnode-even", "tacnode-odd", "hard-tacnode"}));
        s->add_option("--s", *sv, "first time (hard tacnode: s)")->capture_default_str();
        s->add_option("--t", *tv, "second time (hard tacnode: tau)")->capture_default_str();
        s->add_option("--xi", *xi)->capture_default_str();
        s->add_option("--eta", *eta)->capture_default_str();
        s->add_option("--sigma", *sigma, "tacnode pressure parameter")->capture_default_str();
        s->add_option("--alpha", *alpha, "hard-edge Bessel parameter")->capture_default_str();
        s->add_option("--grid", *G, "if > 0, a grid x grid CSV over (xi, eta) in [lo, hi]");
        s->add_option("--lo", *lo)->capture_default_str();
        s->add_option("--hi", *hi)->capture_default_str();
        common(s, false);
        run[s] = [=, &out] {
            std::unique_ptr<HMTable> hm;
            std::unique_ptr<TacnodeContext> ctx;
            if (kind->find("tacnode") != std::string::npos) {
                hm = std::make_unique<HMTable>(hm_solve());
                ctx = std::make_unique<TacnodeContext>(*hm);
            }
            auto eval = [&](double x, double y) -> KernelValue {
                const std::string& k = *kind;
                if (k == "pearcey") return pearcey(*sv, *tv, x, y);
                if (k == "pearcey-even") return pearcey_parity(Parity::even, *sv, *tv, x, y);
                if (k == "pearcey-odd") return pearcey_parity(Parity::odd, *sv, *tv, x, y);
                if (k == "hard-pearcey") return hard_pearcey(*alpha, *sv, *tv, x, y);
                if (k == "tacnode") return tacnode(*ctx, *sv, *tv, x, y, *sigma);
                if (k == "tacnode-even") return tacnode_parity(*ctx, Parity::even, *sv, *tv, x, y, *sigma);
                if (k == "tacnode-odd") return tacnode_parity(*ctx, Parity::odd, *sv, *tv, x, y, *sigma);
                const auto h = hard_tacnode(*alpha, x, y, *sv, *tv, *ctx);
                return {"hard_tacnode", h.value, h.err, h.imag};
            };
            Output o(out);
            if (*G > 0) {
                if (!(*hi > *lo)) throw DomainError("limit: need hi > lo");
                std::vector<double> g(*G);
                for (int i = 0; i < *G; ++i) g[i] = *lo + (i + 0.5) * (*hi - *lo) / *G;
                write_matrix(o.data(), g, [&](double x, double y) { return eval(x, y).value; });
                o.summary(detail::cat("limit: ", *kind, " on a ", *G, " x ", *G, " grid over [", *lo, ", ", *hi, "]"));
            } else {
                const auto v = eval(*xi, *eta);
                o.data() << json{{"kernel", *kind}, {"kernel_id", v.kernel_id}, {"s", *sv}, {"t", *tv}, {"xi", *xi}, {"eta", *eta},
                                 {"sigma", *sigma}, {"alpha", *alpha}, {"value", v.value}, {"err", v.err}, {"imag", v.imag}}.dump(2)
                         << '\n';
                o.summary(detail::cat("limit: ", *kind, " = ", fmt(v.value), " +- ", v.err));
            }
        };
    }

    // painleve
    {
        auto* s = app.add_subcommand("painleve", "Hastings-McLeod PII solutions and the Baecklund ladder on a grid");
        auto L = std::make_shared<double>(12.0), step = std::make_shared<double>(0.005);
        auto nu = std::make_shared<int>(0), stride = std::make_shared<int>(20);
        s->add_option("--nu", *nu, "ladder level, 0..2")->capture_default_str();
        s->add_option("--L", *L, "window [-L, L]")->capture_default_str();
        s->add_option("--step", *step, "grid step")->capture_default_str();
        s->add_option("--stride", *stride, "write every stride-th grid point")->capture_default_str();
        common(s, true);
        run[s] = [=, &out, &format] {
            check_format(format);
            if (*stride < 1) throw DomainError("painleve: --stride must be >= 1");
            const auto hm = hm_solve(*L, *step, std::max(2, *nu));
            if (*nu < 0 || *nu > hm.ladder_max()) throw DomainError(detail::cat("painleve: --nu ", *nu, " outside 0..", hm.ladder_max()));
            const double res = hm.pii_residual(*nu);
            Output o(out);
            std::vector<std::vector<double>> rows;
            for (std::size_t i = 0; i < hm.sigma_grid.size(); i += *stride)
                rows.push_back({hm.sigma_grid[i], hm.q[*nu][i], hm.qp[*nu][i], hm.u[*nu][i]});
            if (format == "json") {
                json j = {{"nu", *nu}, {"L", *L}, {"step", *step}, {"pii_residual", res}, {"sigma", json::array()}, {"q", json::array()},
                          {"qp", json::array()}, {"u", json::array()}};
                for (const auto& r : rows) {
                    j["sigma"].push_back(r[0]);
                    j["q"].push_back(r[1]);
                    j["qp"].push_back(r[2]);
                    j["u"].push_back(r[3]);
                }
                o.data() << j.dump(2) << '\n';
            } else {
                io::write_csv(o.data(), {"sigma", "q", "qp", "u"}, rows);
            }
            o.summary(detail::cat("painleve: nu = ", *nu, " on [-", *L, ", ", *L, "], PII residual ", res));
        };
    }

    // schlesinger-check
    {
        auto* s = app.add_subcommand("schlesinger-check", "Schlesinger step U_nu -> U_{nu+1} and the R-matrix identities on a grid");
        auto nus = std::make_shared<std::vector<int>>(std::vector<int>{0, 1});
        auto ss = std::make_shared<std::vector<double>>(std::vector<double>{-0.5, 0.4, 1.5});
        auto taus = std::make_shared<std::vector<double>>(std::vector<double>{-0.4, 0.0, 0.3});
        auto zs = std::make_shared<std::vector<std::string>>(std::vector<std::string>{"1+0.5i", "0.3-1.2i", "-2+0.7i"});
        auto tol = std::make_shared<double>(1e-8), tol_id = std::make_shared<double>(1e-12);
        s->add_option("--nu", *nus, "levels nu (step to nu + 1)")->capture_default_str();
        s->add_option("--s", *ss)->capture_default_str();
        s->add_option("--tau", *taus)->capture_default_str();
        s->add_option("--z", *zs, "complex spectral points like 1+0.5i")->capture_default_str();
        s->add_option("--tol", *tol, "bound on the Schlesinger residual")->capture_default_str();
        s->add_option("--tol-identities", *tol_id, "bound on R^2, R D R, beta delta + gamma")->capture_default_str();
        common(s, false);
        run[s] = [=, &out] {
            std::vector<cplx> z;
            for (const auto& str : *zs) {
                // a+bi, a, or bi
                std::string t = str;
                t.erase(std::remove(t.begin(), t.end(), ' '), t.end());
                double re = 0, im = 0;
                if (!t.empty() && t.back() == 'i') {
                    t.pop_back();
                    std::size_t cut = t.find_last_of("+-");
                    while (cut != std::string::npos && cut > 0 && (t[cut - 1] == 'e' || t[cut - 1] == 'E')) cut = t.find_last_of("+-", cut - 1);
                    const std::string a = cut == std::string::npos || cut == 0 ? "" : t.substr(0, cut);
                    std::string b = cut == std::string::npos ? t : t.substr(cut);
                    if (b == "+" || b == "-" || b.empty()) b += "1";
                    try {
                        re = a.empty() ? 0.0 : std::stod(a);
                        im = std::stod(b);
                    } catch (const std::exception&) {
                        throw DomainError("--z: cannot read " + str);
                    }
                } else {
                    try {
                        re = std::stod(t);
                    } catch (const std::exception&) {
                        throw DomainError("--z: cannot read " + str);
                    }
                }
                z.emplace_back(re, im);
            }
            int top = 0;
            for (int v : *nus) top = std::max(top, v + 1);
            const auto hm = hm_solve(12.0, 0.005, std::max(2, top));
            Output o(out);
            std::vector<std::vector<double>> rows;
            double worst = 0, ident = 0;
            for (int v : *nus)
                for (double sv : *ss)
                    for (double tv : *taus)
                        for (cplx zv : z) {
                            const auto c = schlesinger_residual(lax_point(v, sv, tv, hm), lax_point(v + 1, sv, tv, hm), zv);
                            rows.push_back({double(v), sv, tv, zv.real(), zv.imag(), c.residual, c.inverse, c.rdr, c.rd, c.beta_delta_gamma, c.commutator});
                            worst = std::max(worst, c.residual);
                            ident = std::max({ident, c.inverse, c.rdr, c.rd, c.beta_delta_gamma});
                        }
            io::write_csv(o.data(), {"nu", "s", "tau", "z_re", "z_im", "residual", "inverse", "rdr", "rd", "beta_delta_gamma", "commutator"}, rows);
            const bool pass = worst < *tol && ident < *tol_id;
            o.summary(detail::cat("schlesinger-check: ", pass ? "PASS" : "FAIL", ", ", rows.size(), " points, max residual ", worst, ", identities ", ident));
            if (!pass) throw CheckFailed{};
        };
    }

    // converge
    {
        auto* s = app.add_subcommand("converge", "sup-grid error of the scaled finite kernel against its limit, over n");
        auto which = std::make_shared<std::string>();
        auto ns = std::make_shared<std::vector<int>>(std::vector<int>{16, 32, 64});
        auto T = std::make_shared<std::optional<double>>(), sigma = std::make_shared<std::optional<double>>(), d = std::make_shared<std::optional<double>>();
        s->add_option("--case", *which, "pearcey_reflect, pearcey_absorb, tac_reflect, tac_absorb")->required();
        s->add_option("--n", *ns, "particle numbers")->capture_default_str();
        s->add_option("--T", *T, "Pearcey cases: T > pi^2/2");
        s->add_option("--sigma", *sigma, "tacnode cases: pressure (default 0)");
        s->add_option("--d", *d, "time-scaling constant; Pearcey cases calibrate it when absent");
        common(s, false);
        run[s] = [=, &out] {
            const auto c = parse_case(*which);
            std::unique_ptr<HMTable> hm;
            std::unique_ptr<TacnodeContext> ctx;
            double param;
            if (is_tacnode(c)) {
                if (*T) throw DomainError("converge: tacnode cases take --sigma, not --T");
                param = sigma->value_or(0.0);
                hm = std::make_unique<HMTable>(hm_solve());
                ctx = std::make_unique<TacnodeContext>(*hm);
            } else {
                if (*sigma) throw DomainError("converge: Pearcey cases take --T, not --sigma");
                if (!*T) throw DomainError("converge: Pearcey cases need --T");
                param = **T;
            }
            const auto r = converge_check(c, *ns, default_grid(), param, *d, ctx.get());
            Output o(out);
            o.data() << to_json(r).dump(2) << '\n';
            std::ostringstream os;
            for (const auto& row : r.rows) os << " n=" << row.n << ":" << row.sup_error;
            o.summary(detail::cat("converge: ", *which, r.strictly_decreasing() ? " strictly decreasing" : " NOT strictly decreasing", ", d = ", r.d,
                                  " (", r.d_source, "),", os.str()));
            if (!r.strictly_decreasing()) throw CheckFailed{};
        };
    }

    // elliptic
    {
        auto* s = app.add_subcommand("elliptic", "solve T = 2 K~ E~ for k and report the supercritical parameters");
        auto T = std::make_shared<double>();
        auto alpha = std::make_shared<std::optional<double>>();
        s->add_option("--T", *T, "T > pi^2/2")->required();
        s->add_option("--alpha", *alpha, "constant in the d formula (not fixed by the model)");
        common(s, false);
        run[s] = [=, &out] {
            const auto p = solve_k(*T, *alpha);
            const double back = T_of_k(p.k);
            json j = to_json(p);
            j["T_round_trip"] = back;
            Output o(out);
            o.data() << j.dump(2) << '\n';
            o.summary(detail::cat("elliptic: T = ", *T, " k = ", fmt(p.k), " t_c = ", fmt(p.t_c), ", |T(k) - T| = ", std::abs(back - *T), ", d ",
                                  p.d ? "computed" : "undefined"));
        };
    }

    // simulate
    {
        auto* s = app.add_subcommand("simulate", "Monte Carlo bridges; writes a slice histogram and optionally the paths");
        auto bc = std::make_shared<std::string>(), method = std::make_shared<std::string>("rejection"), paths = std::make_shared<std::string>();
        auto n = std::make_shared<int>(), steps = std::make_shared<int>(50), bins = std::make_shared<int>(20), slice = std::make_shared<int>(-1),
             replicas = std::make_shared<int>(4);
        auto T = std::make_shared<double>();
        auto eps = std::make_shared<std::optional<double>>();
        auto samples = std::make_shared<std::size_t>(10000);
        auto seed = std::make_shared<std::uint64_t>(1);
        s->add_option("--bc", *bc, "reflect or absorb")->required();
        s->add_option("--n", *n, "1..4")->required();
        s->add_option("--T", *T)->required();
        s->add_option("--steps", *steps, "time slices after 0")->capture_default_str();
        s->add_option("--eps", *eps, "start/end spacing (default 0.05 pi/n)");
        s->add_option("--samples", *samples)->capture_default_str();
        s->add_option("--seed", *seed)->capture_default_str();
        s->add_option("--method", *method, "rejection or skeleton")->capture_default_str();
        s->add_option("--replicas", *replicas, "independent streams (part of the seeded result)")->capture_default_str();
        s->add_option("--slice", *slice, "histogram slice (default steps/2)");
        s->add_option("--bins", *bins)->capture_default_str();
        s->add_option("--paths", *paths, "also save the ensemble to this file");
        common(s, false);
        run[s] = [=, &out] {
            const auto b = parse_bc(*bc);
            const auto ens = sample_paths(b, *n, *T, *steps, eps->value_or(default_eps(std::max(*n, 1))), *samples, *seed, parse_method(*method), *replicas);
            const int k = *slice < 0 ? *steps / 2 : *slice;
            if (*bins < 1) throw DomainError("simulate: --bins must be >= 1");
            const auto h = slice_histogram(ens, k, *bins);
            if (!paths->empty()) save_ensemble(ens, *paths);
            Output o(out);
            io::write_histogram_csv(o.data(), h);
            o.summary(detail::cat("simulate: ", *bc, " n = ", *n, " T = ", *T, " ", to_string(ens.method), ", ", ens.samples, " samples, acceptance ",
                                  ens.acceptance_rate(), ", histogram at t = ", fmt(ens.time(k))));
        };
    }

    // verify-all
    {
        auto* s = app.add_subcommand("verify-all", "the acceptance suite; nonzero exit on any failure");
        auto fast = std::make_shared<bool>(false);
        auto only = std::make_shared<std::vector<int>>();
        s->add_flag("--fast", *fast, "2000 Monte Carlo samples instead of 1e5");
        s->add_option("--only", *only, "criterion numbers");
        run[s] = [=] {
            int failed = 0;
            const auto res = verify::run(*only, *fast, [&](const CriterionResult& r) {
                std::printf("criterion %2d %s  %s (%.1f s)\n", r.id, r.pass ? "PASS" : "FAIL", r.title.c_str(), r.seconds);
                for (const auto& l : r.lines) std::printf("      %s\n", l.c_str());
                std::fflush(stdout);
                failed += !r.pass;
            });
            std::printf("verify-all%s: %zu criteria, %d failed\n", *fast ? " --fast" : "", res.size(), failed);
            if (failed) throw CheckFailed{};
        };
    }

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = apply_config(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (auto* sub : app.get_subcommands()) run.at(sub)();
    } catch (const CheckFailed&) {
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
