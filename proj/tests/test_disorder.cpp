#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace fwtest;

namespace {

DisorderModel model(int n, PhaseLaw law, double theta0, double eta, double t = 0.6) {
    DisorderModel m;
    m.t = t;
    m.r = std::sqrt(1 - t * t);
    m.n = n;
    m.mu = PhaseDistribution{law, theta0, eta};
    return m;
}

// greedy nearest matching; fine for well separated or exactly repeated values
double multiset_distance(std::vector<cplx> a, std::vector<cplx> b) {
    EXPECT_EQ(a.size(), b.size());
    double worst = 0.0;
    for (const cplx& z : a) {
        auto it = std::min_element(b.begin(), b.end(),
                                   [&](cplx p, cplx q) { return std::abs(p - z) < std::abs(q - z); });
        worst = std::max(worst, std::abs(*it - z));
        b.erase(it);
    }
    return worst;
}

} // namespace

TEST(Disorder, CayleySpectrumMatchesGeneralSolver) {
    std::mt19937_64 rng(4);
    for (int d : {2, 7, 40}) {
        const CMatrix u = random_unitary(d, rng);
        EXPECT_LT(multiset_distance(unitary_eigenvalues(u), eigenvalues(u)), 1e-10) << d;
    }
    // −1 in the spectrum and heavy degeneracy
    const auto m = model(16, PhaseLaw::point, 0.0, 0.0);
    const CMatrix w = sample_disordered_walk(m, 0).walk.w;
    EXPECT_LT(multiset_distance(unitary_eigenvalues(-w), eigenvalues(-w)), 1e-10);
    EXPECT_LT(multiset_distance(unitary_eigenvalues(CMatrix::Identity(6, 6)), std::vector<cplx>(6, 1.0)), 1e-14);
    EXPECT_LT(multiset_distance(unitary_eigenvalues(-CMatrix::Identity(6, 6)), std::vector<cplx>(6, -1.0)), 1e-14);
}

TEST(Disorder, SamplesAreUnitary) {
    const auto m = model(9, PhaseLaw::uniform, 0.4, 1.0);
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto smp = sample_disordered_walk(m, derive_seed(7, s));
        const CMatrix& w = smp.walk.w;
        EXPECT_LT((w.adjoint() * w - CMatrix::Identity(w.rows(), w.cols())).norm(), 1e-12) << s;
        for (double x : smp.omega_plus) EXPECT_TRUE(x >= m.mu.lo() && x <= m.mu.hi());
    }
}

TEST(Disorder, SameSeedSameSample) {
    const auto m = model(8, PhaseLaw::uniform, 0.0, 2.0);
    const auto a = sample_disordered_walk(m, 99), b = sample_disordered_walk(m, 99), c = sample_disordered_walk(m, 100);
    EXPECT_EQ(a.omega_plus, b.omega_plus);
    EXPECT_EQ(a.omega_minus, b.omega_minus);
    EXPECT_NE(a.omega_plus, c.omega_plus);
}

TEST(Disorder, RelabelingIsRingShiftConjugation) {
    const auto m = model(7, PhaseLaw::uniform, 1.0, 3.0);
    const auto a = sample_disordered_walk(m, 5);
    std::vector<double> wp(m.n), wm(m.n);
    for (int nu = 0; nu < m.n; ++nu) {
        wp[(nu + 1) % m.n] = a.omega_plus[nu];
        wm[(nu + 1) % m.n] = a.omega_minus[nu];
    }
    const Walk b = ring_walk(m, wp, wm);
    // site ν → ν+1, spin untouched
    CMatrix p = CMatrix::Zero(2 * m.n, 2 * m.n);
    for (int nu = 0; nu < m.n; ++nu)
        for (int s = 0; s < 2; ++s) p(2 * ((nu + 1) % m.n) + s, 2 * nu + s) = 1.0;
    EXPECT_LT((b.w - p * a.walk.w * p.adjoint()).norm(), 1e-13);
    EXPECT_LT(multiset_distance(eigenvalues(a.walk.w), eigenvalues(b.w)), 1e-10);
}

TEST(Disorder, CleanRingMatchesBlochSpectrum) {
    for (int n : {5, 8, 13})
        for (double theta0 : {0.0, 0.7, -2.1}) {
            const auto m = model(n, PhaseLaw::point, theta0, 0.0, 0.35);
            const auto smp = sample_disordered_walk(m, 1);
            const auto bloch = bloch_spectrum(m.t, m.r, theta0, n);
            EXPECT_LT(multiset_distance(bloch, eigenvalues(smp.walk.w)), 1e-10) << n << " " << theta0;
            for (const cplx& z : bloch) EXPECT_LT(band_excess(z, m.t, theta0, theta0), 1e-12);
        }
}

TEST(Disorder, GlobalPhaseRotatesSpectrum) {
    // all phases θ₀: the walk is e^{−iθ₀} times the θ₀ = 0 walk
    const auto m0 = model(6, PhaseLaw::point, 0.0, 0.0), m1 = model(6, PhaseLaw::point, 0.9, 0.0);
    const CMatrix w0 = sample_disordered_walk(m0, 0).walk.w, w1 = sample_disordered_walk(m1, 0).walk.w;
    EXPECT_LT((w1 - std::polar(1.0, -0.9) * w0).norm(), 1e-13);
}

TEST(Disorder, BandExcess) {
    const double t = 0.5;
    // ±i sit in the middle of Λ±
    EXPECT_EQ(band_excess(cplx(0, 1), t, 0, 0), 0.0);
    EXPECT_NEAR(band_excess(cplx(1, 0), t, 0, 0), 0.5, 1e-15);
    // rotating by θ sweeps 1 into the band once cos θ ≤ t
    EXPECT_EQ(band_excess(cplx(1, 0), t, 0, std::numbers::pi / 3 + 1e-9), 0.0);
    EXPECT_GT(band_excess(cplx(1, 0), t, 0, std::numbers::pi / 3 - 1e-3), 0.0);
}

TEST(Disorder, PointMassSupport) {
    const auto m = model(64, PhaseLaw::point, 0.3, 0.0);
    const auto est = density_of_states(m, 4, 256, 1);
    const auto rep = support_report(est, m);
    EXPECT_EQ(rep.outside, 0);
    EXPECT_LT(rep.max_excess, 1e-10);
    EXPECT_EQ(rep.stray_bins, 0);
    EXPECT_EQ(rep.missed_edges, 0);
}

TEST(Disorder, UniformSupport) {
    const auto m = model(128, PhaseLaw::uniform, 0.3, 0.05);
    const auto est = density_of_states(m, 16, 256, 3);
    const auto rep = support_report(est, m);
    EXPECT_EQ(rep.outside, 0);
    EXPECT_LT(rep.max_excess, 1e-10);
    EXPECT_EQ(rep.stray_bins, 0);
}

TEST(Disorder, DensityIsProbability) {
    const auto m = model(32, PhaseLaw::uniform, 0.0, 0.5);
    const auto est = density_of_states(m, 12, 100, 11);
    double tot = 0;
    for (double x : est.mass) {
        EXPECT_GE(x, 0.0);
        tot += x;
    }
    EXPECT_NEAR(tot, 1.0, 1e-12);
    EXPECT_EQ(est.mass.size(), 100u);
    EXPECT_EQ(est.stderr_.size(), 100u);
}

TEST(Disorder, ThreadCountDoesNotChangeResults) {
    const auto m = model(24, PhaseLaw::uniform, 0.2, 1.5);
    const auto a = density_of_states(m, 20, 64, 42, 1), b = density_of_states(m, 20, 64, 42, 4);
    EXPECT_EQ(a.mass, b.mass);
    EXPECT_EQ(a.stderr_, b.stderr_);
    const SymbolFunction f = quarter_symbol();
    const auto c = averaged_density(m, f, 0.4, 10, 42, 1), d = averaged_density(m, f, 0.4, 10, 42, 3);
    EXPECT_EQ(c.value, d.value);
    EXPECT_EQ(c.dos_value, d.dos_value);
}

TEST(Disorder, ConstantSymbolDensity) {
    // per node: two spin entries, each 2Re F = 2F(0)
    const auto m = model(16, PhaseLaw::uniform, 0.0, 1.0);
    const auto a = averaged_density(m, SymbolFunction{{0.3}}, 0.5, 6, 3);
    // F(0) = c(0)/2 = 0.15
    EXPECT_NEAR(a.value, 4 * 0.15, 1e-12);
    EXPECT_NEAR(a.dos_value, 4 * 0.15, 1e-12);
    EXPECT_EQ(a.bias_bound, 0.0);
    EXPECT_EQ(a.used, 6);
}

TEST(Disorder, AveragedDensityAgreesWithDOS) {
    // clean ring: every draw is the same walk, so the two estimators differ
    // only by the rank-one coupling correction
    const auto m = model(128, PhaseLaw::point, 0.4, 0.0);
    const auto a = averaged_density(m, quarter_symbol(), 0.3, 8, 17, 4, true);
    EXPECT_EQ(a.used, 8);
    EXPECT_EQ(a.non_cyclic.size(), 8u);
    EXPECT_LT(a.stderr_, 1e-12);
    const double se = std::hypot(a.stderr_, a.dos_stderr);
    EXPECT_LE(std::abs(a.value - a.dos_value), 3 * se + a.bias_bound);
}

TEST(Disorder, WeakDisorderAgreesWithDOS) {
    const auto m = model(48, PhaseLaw::uniform, 0.4, 0.05);
    const auto a = averaged_density(m, quarter_symbol(), 0.3, 30, 5, 4);
    ASSERT_GE(a.used, 2);
    const double se = std::hypot(a.stderr_, a.dos_stderr);
    EXPECT_LE(std::abs(a.value - a.dos_value), 3 * se + a.bias_bound);
}

TEST(Disorder, CleanRingIsNeverCyclic) {
    const auto m = model(12, PhaseLaw::point, 0.4, 0.0);
    EXPECT_THROW(averaged_density(m, quarter_symbol(), 0.3, 3, 0), DomainError);
    // degenerate pair at k = ±2π/12: the antisymmetric combination vanishes at site 0
    const auto bloch = bloch_spectrum(m.t, m.r, m.mu.theta0, m.n);
    int paired = 0;
    for (std::size_t i = 0; i < bloch.size(); ++i)
        for (std::size_t j = i + 1; j < bloch.size(); ++j) paired += std::abs(bloch[i] - bloch[j]) < 1e-12;
    EXPECT_GE(paired, m.n - 2);
}

TEST(Disorder, LocalizedDrawsAreSkipped) {
    // strong disorder localizes most modes away from the coupled site, so
    // spr(M) is 1 to working precision
    const auto m = model(96, PhaseLaw::uniform, 0.0, std::numbers::pi);
    try {
        const auto a = averaged_density(m, quarter_symbol(), 0.3, 6, 1);
        EXPECT_FALSE(a.skipped.empty());
        EXPECT_EQ(a.used + static_cast<int>(a.skipped.size()), 6);
    } catch (const DomainError&) {
        SUCCEED();
    }
}

TEST(Disorder, BiasBoundShrinksWithN) {
    const SymbolFunction f = quarter_symbol();
    const auto a = averaged_density(model(16, PhaseLaw::point, 0, 0), f, 1.0, 2, 1, 1, true);
    const auto b = averaged_density(model(64, PhaseLaw::point, 0, 0), f, 1.0, 2, 1, 1, true);
    EXPECT_NEAR(a.bias_bound / b.bias_bound, 4.0, 1e-12);
    EXPECT_LE(std::abs(a.value - a.dos_value), a.bias_bound);
    EXPECT_LE(std::abs(b.value - b.dos_value), b.bias_bound);
}

TEST(Disorder, Validation) {
    EXPECT_THROW(sample_disordered_walk(model(2, PhaseLaw::point, 0, 0), 0), ValidationError);
    auto bad = model(8, PhaseLaw::point, 0, 0);
    bad.r = 0.5;
    EXPECT_THROW(validate_disorder(bad), ValidationError);
    EXPECT_THROW(validate_disorder(model(8, PhaseLaw::uniform, 0, 0)), ValidationError);
    EXPECT_THROW(validate_disorder(model(8, PhaseLaw::point, 0, 0, 1.0)), ValidationError);
    EXPECT_THROW(density_of_states(model(8, PhaseLaw::point, 0, 0), 0, 10, 0), ValidationError);
    EXPECT_THROW(averaged_density(model(8, PhaseLaw::point, 0, 0), quarter_symbol(), 0.3, 1, 0), ValidationError);
}
