#include <gtest/gtest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "oracles.hpp"
#include "wallbridge/io.hpp"
#include "wallbridge/mc_sim.hpp"

using namespace wallbridge;
using BC = BoundaryCondition;

namespace {

constexpr std::size_t kSamples = 100000;
constexpr double kT = 4.0;

const PathEnsemble& reflect_one() {
    static const PathEnsemble e = sample_paths(BC::reflect, 1, kT, 50, default_eps(1), kSamples, 7);
    return e;
}

const PathEnsemble& absorb_two() {
    static const PathEnsemble e = sample_paths(BC::absorb, 2, kT, 50, default_eps(2), kSamples, 11, SamplerMethod::skeleton);
    return e;
}

/// Fourier form of the heat kernel: the sampler only uses images.
double P(BC bc, double x, double y, double t, int n) { return trans_density_fourier(bc, x, y, t, n); }

/// One-point density of two bridges a -> a over [0, T] at time t, by the
/// Karlin-McGregor formula integrated over the second particle.
double two_particle_density(BC bc, double T, double t, double a1, double a2, double y) {
    auto f = [&](double z) {
        const double A = P(bc, a1, y, t, 2) * P(bc, a2, z, t, 2) - P(bc, a1, z, t, 2) * P(bc, a2, y, t, 2);
        const double B = P(bc, y, a1, T - t, 2) * P(bc, z, a2, T - t, 2) - P(bc, z, a1, T - t, 2) * P(bc, y, a2, T - t, 2);
        return A * B;
    };
    const double Z = P(bc, a1, a1, T, 2) * P(bc, a2, a2, T, 2) - P(bc, a1, a2, T, 2) * P(bc, a2, a1, T, 2);
    return (oracle::simpson(f, 0, y, 1e-11) + oracle::simpson(f, y, pi, 1e-11)) / Z;
}

/// z-scores of a histogram against bin averages of a density. The error per bin is
/// the empirical one, or the Poisson one from the oracle where it is larger (bins
/// with a handful of hits).
std::vector<double> zscores(const Histogram& h, std::size_t S, const std::function<double(double)>& rho) {
    std::vector<double> z;
    const double w = h.width();
    for (std::size_t b = 0; b < h.density.size(); ++b) {
        const double lo = h.lo + b * w, expect = oracle::simpson(rho, lo, lo + w, 1e-9) / w;
        const double q = expect * w, model = std::sqrt(std::max(q * (1 - q), 0.0) / S) / w;
        z.push_back((h.density[b] - expect) / std::max(h.stderr_[b], model));
    }
    return z;
}

double worst(const std::vector<double>& z) {
    double m = 0.0;
    for (double v : z) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

TEST(McSim, SingleReflectBridgeMatchesExactDensity) {
    const auto& e = reflect_one();
    ASSERT_EQ(e.samples, kSamples);
    EXPECT_EQ(e.acceptance_rate(), 1.0);
    const double a = e.eps;
    for (int k : {10, 25, 40}) {
        const double t = e.time(k);
        auto rho = [&](double x) { return P(BC::reflect, a, x, t, 1) * P(BC::reflect, x, a, kT - t, 1) / P(BC::reflect, a, a, kT, 1); };
        const auto z = zscores(slice_histogram(e, k, 20), e.samples, rho);
        EXPECT_LT(worst(z), 3.0) << "slice " << k;
    }
}

TEST(McSim, TwoAbsorbMatchesKernelDensity) {
    const auto& e = absorb_two();
    const FiniteKernel K(BC::absorb, 2, kT);
    const auto z = zscores(slice_histogram(e, 25, 20), e.samples, [&](double x) { return K(kT / 2, kT / 2, x, x); });
    EXPECT_LT(worst(z), 3.0);
    // and the separated end points exactly
    const auto ze = zscores(slice_histogram(e, 25, 20), e.samples, [&](double x) { return two_particle_density(BC::absorb, kT, kT / 2, e.eps, 2 * e.eps, x); });
    EXPECT_LT(worst(ze), 3.0);
}

TEST(McSim, OrderedAndOffTheAbsorbingWalls) {
    const auto& e = absorb_two();
    double closest = pi;
    bool ordered = true;
    for (std::size_t s = 0; s < e.samples; ++s)
        for (int k = 0; k <= e.steps; ++k) {
            ordered = ordered && e.at(s, k, 0) < e.at(s, k, 1);
            closest = std::min({closest, double(e.at(s, k, 0)), pi - double(e.at(s, k, 1))});
        }
    EXPECT_TRUE(ordered);
    EXPECT_GT(closest, 0.0);
    EXPECT_GT(e.acceptance_rate(), 0.0);
    EXPECT_LE(e.acceptance_rate(), 1.0);
    for (float x : reflect_one().paths) {
        ASSERT_GE(x, 0.0f);
        ASSERT_LE(x, float(pi));
    }
}

TEST(McSim, RejectionSamplerMatchesExactTwoParticleDensity) {
    // short horizon: the proposals survive often enough to sample by rejection
    const double T = 0.25;
    const auto e = sample_paths(BC::reflect, 2, T, 50, default_eps(2), 4000, 5);
    EXPECT_LT(e.acceptance_rate(), 0.1);
    for (int k : {10, 25}) {
        const auto h = slice_histogram(e, k, 20, 0.0, 1.2);
        const auto z = zscores(h, e.samples, [&](double x) { return two_particle_density(BC::reflect, T, e.time(k), e.eps, 2 * e.eps, x); });
        EXPECT_LT(worst(z), 3.0) << "slice " << k;
    }
}

TEST(McSim, ThreeParticleSkeletonMatchesKernel) {
    const auto e = sample_paths(BC::reflect, 3, kT, 50, default_eps(3), 4000, 9, SamplerMethod::skeleton);
    const FiniteKernel K(BC::reflect, 3, kT);
    const auto z = zscores(slice_histogram(e, 20, 20), e.samples, [&](double x) { return K(e.time(20), e.time(20), x, x); });
    EXPECT_LT(worst(z), 3.0);
}

TEST(McSim, SeededRunsAreByteIdentical) {
    for (auto m : {SamplerMethod::rejection, SamplerMethod::skeleton}) {
        const auto a = sample_paths(BC::absorb, 2, 0.5, 50, default_eps(2), 300, 3, m);
        const auto b = sample_paths(BC::absorb, 2, 0.5, 50, default_eps(2), 300, 3, m);
        const auto c = sample_paths(BC::absorb, 2, 0.5, 50, default_eps(2), 300, 4, m);
        ASSERT_EQ(a.paths.size(), b.paths.size());
        EXPECT_EQ(std::memcmp(a.paths.data(), b.paths.data(), a.paths.size() * sizeof(float)), 0);
        EXPECT_EQ(a.attempts, b.attempts);
        EXPECT_NE(std::memcmp(a.paths.data(), c.paths.data(), a.paths.size() * sizeof(float)), 0);

        const auto dir = std::filesystem::temp_directory_path();
        const auto fa = (dir / "wallbridge_mc_a.bin").string(), fb = (dir / "wallbridge_mc_b.bin").string();
        save_ensemble(a, fa);
        save_ensemble(b, fb);
        std::ifstream ia(fa, std::ios::binary), ib(fb, std::ios::binary);
        const std::string sa((std::istreambuf_iterator<char>(ia)), {}), sb((std::istreambuf_iterator<char>(ib)), {});
        EXPECT_EQ(sa, sb);
        const auto r = load_ensemble(fa);
        EXPECT_EQ(r.method, m);
        EXPECT_EQ(r.samples, a.samples);
        EXPECT_EQ(r.paths, a.paths);
        std::filesystem::remove(fa);
        std::filesystem::remove(fb);
    }
}

TEST(McSim, HalvedEpsShiftsLittle) {
    // 3 sigma read as a family-wise level over the non-empty bins: each bin gets the
    // Sidak threshold with the false-alarm rate of a single 3 sigma test, and the
    // chi-square over all bins must pass at that same rate.
    const auto& e = absorb_two();
    const auto f = sample_paths(BC::absorb, 2, kT, 50, e.eps / 2, 20000, 12, SamplerMethod::skeleton);
    const auto h1 = slice_histogram(e, 25, 20), h2 = slice_histogram(f, 25, 20);
    const boost::math::normal N;
    const double alpha = 2 * boost::math::cdf(N, -3.0);
    int used = 0;
    for (int b = 0; b < 20; ++b) used += std::hypot(h1.stderr_[b], h2.stderr_[b]) > 0;
    const double zcrit = -boost::math::quantile(N, (1 - std::pow(1 - alpha, 1.0 / used)) / 2);
    double chi2 = 0.0;
    for (int b = 0; b < 20; ++b) {
        const double s = std::hypot(h1.stderr_[b], h2.stderr_[b]);
        if (s > 0) {
            EXPECT_LT(std::abs(h1.density[b] - h2.density[b]), zcrit * s) << b;
            chi2 += std::pow((h1.density[b] - h2.density[b]) / s, 2);
        }
    }
    EXPECT_LT(chi2, boost::math::quantile(boost::math::chi_squared(used), 1 - alpha));
}

TEST(Correlation, OnePointIntegratesToN) {
    const auto& e = absorb_two();
    const double w = pi / 20;
    double total = 0.0, var = 0.0;
    for (int b = 0; b < 20; ++b) {
        const auto c = empirical_correlation(e, {{kT / 2, (b + 0.5) * w}}, w);
        total += c.estimate * w;
        var += c.stderr_ * w * c.stderr_ * w;
    }
    EXPECT_NEAR(total, 2.0, 3 * std::sqrt(var) + 1e-12);
}

TEST(Correlation, PairRepulsionAndKernel) {
    const auto& e = absorb_two();
    const double bw = 0.1, x = 1.0, y = 1.1, t = kT / 2;
    const auto pair = empirical_correlation(e, {{t, x}, {t, y}}, bw);
    const auto px = empirical_correlation(e, {{t, x}}, bw), py = empirical_correlation(e, {{t, y}}, bw);
    EXPECT_LT(pair.estimate, px.estimate * py.estimate);
    // bin average of the 2x2 determinant
    const FiniteKernel K(BC::absorb, 2, kT);
    const double avg = oracle::simpson([&](double u) {
        return oracle::simpson([&](double v) { return corr_det(K, {{t, u}, {t, v}}); }, y - bw / 2, y + bw / 2, 1e-7);
    }, x - bw / 2, x + bw / 2, 1e-7) / (bw * bw);
    EXPECT_NEAR(pair.estimate, avg, 3 * pair.stderr_);
    // two times: the same particle is allowed
    const auto across = empirical_correlation(e, {{e.time(20), x}, {e.time(30), x}}, bw);
    EXPECT_GT(across.estimate, 0.0);
    EXPECT_TRUE(empirical_correlation(e, {{t, 3.1}, {t, 3.0}}, 0.05).warnings.size() == 1);
}

TEST(Correlation, HalvingBinwidthIsConsistent) {
    const auto& e = absorb_two();
    const auto a = empirical_correlation(e, {{kT / 2, 1.0}}, 0.2), b = empirical_correlation(e, {{kT / 2, 1.0}}, 0.1);
    EXPECT_LT(std::abs(a.estimate - b.estimate), std::hypot(a.stderr_, b.stderr_));
}

TEST(McSim, Errors) {
    EXPECT_THROW(sample_paths(BC::reflect, 5, 1.0, 50, 0.01, 10, 1), DomainError);
    EXPECT_THROW(sample_paths(BC::reflect, 2, 1.0, 49, 0.01, 10, 1), DomainError);
    EXPECT_THROW(sample_paths(BC::circle, 2, 1.0, 50, 0.01, 10, 1), DomainError);
    EXPECT_THROW(sample_paths(BC::absorb, 2, 1.0, 50, 0.0, 10, 1), DomainError);
    EXPECT_THROW(sample_paths(BC::absorb, 2, -1.0, 50, 0.1, 10, 1), DomainError);
    EXPECT_THROW(parse_method("exact"), DomainError);
    const auto& e = absorb_two();
    EXPECT_THROW(empirical_correlation(e, {{0.3, 1.0}}, 0.1), DomainError);
    EXPECT_THROW(empirical_correlation(e, {{kT / 2, 1.0}, {kT / 2, 1.05}}, 0.1), DomainError);
    EXPECT_THROW(slice_histogram(e, 51, 10), DomainError);
    // essentially confluent start for four particles: proposals never survive
    try {
        sample_paths(BC::reflect, 4, 10.0, 50, 1e-4, 10, 1, SamplerMethod::rejection, 1);
        ADD_FAILURE() << "expected low-acceptance abort";
    } catch (const ConvergenceError& err) {
        EXPECT_NE(std::string(err.what()).find("increase eps"), std::string::npos);
    }
}

TEST(Io, HistogramCsvRoundTrips) {
    const auto h = slice_histogram(absorb_two(), 25, 4);
    std::ostringstream os;
    io::write_histogram_csv(os, h);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "lo,hi,density,stderr");
    for (int b = 0; b < 4; ++b) {
        std::getline(is, line);
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
        ASSERT_EQ(v.size(), 4u);
        EXPECT_EQ(v[2], h.density[b]);
        EXPECT_EQ(v[3], h.stderr_[b]);
    }
    EXPECT_EQ(io::num(0.1), "0.10000000000000001");
    std::ostringstream bad;
    EXPECT_THROW(io::write_csv(bad, {"a", "b"}, {{1.0}}), DomainError);
}
