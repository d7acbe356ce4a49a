#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace fwtest;

TEST(Symbol, EvaluatesPolynomial) {
    const SymbolFunction f{{0.5, cplx(0.1, 0.2), 0.125}};
    const cplx z = std::polar(0.7, 0.4);
    EXPECT_LT(std::abs(f(z) - (0.25 + cplx(0.1, 0.2) * z + 0.125 * z * z)), 1e-15);
    EXPECT_EQ(f.l_max(), 2);
    EXPECT_EQ(SymbolFunction::constant(0.3)(z), cplx(0.15));
}

TEST(Symbol, QuarterPlusZetaIsRejected) {
    // 2 Re F(e^{iφ}) = 1/2 + 2cos φ leaves [0, 1] on both sides
    const auto rep = validate_symbol(std::vector<SymbolFunction>{SymbolFunction{{0.5, 1.0}}});
    EXPECT_FALSE(rep.pass);
    EXPECT_EQ(rep.worst_index, 0);
    EXPECT_NE(rep.message.find("bound"), std::string::npos);
    EXPECT_NEAR(std::abs(rep.worst_value - 0.5), 2.0, 1e-6);
}

TEST(Symbol, QuarterPlusZetaSquaredIsAdmissible) {
    const auto rep = validate_symbol(std::vector<SymbolFunction>{quarter_symbol()});
    EXPECT_TRUE(rep.pass);
    EXPECT_NEAR(rep.ranges[0].min, 0.25, 1e-12);
    EXPECT_NEAR(rep.ranges[0].max, 0.75, 1e-12);
}

TEST(Symbol, CoefficientChecks) {
    EXPECT_THROW(validate_coefficients(SymbolFunction{{cplx(0.5, 0.1)}}, 0), ValidationError);
    EXPECT_THROW(validate_coefficients(SymbolFunction{{1.5}}, 0), ValidationError);
    EXPECT_THROW(validate_coefficients(SymbolFunction{}, 0), ValidationError);
}

TEST(Environment, SortedPhasesAndProjectors) {
    std::mt19937_64 rng(11);
    const Environment env = random_environment(3, 2, rng);
    EXPECT_TRUE(std::is_sorted(env.gamma.begin(), env.gamma.end()));
    CMatrix sum = CMatrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i) {
        sum += env.projector(i);
        // U x_i = e^{iγ_i} x_i
        EXPECT_LT((env.u * env.x.col(i) - std::polar(1.0, env.gamma[i]) * env.x.col(i)).norm(), 1e-12);
    }
    EXPECT_LT(operator_norm(sum - CMatrix::Identity(3, 3)), 1e-12);
}

TEST(Environment, PhaseListMatchesMatrix) {
    std::mt19937_64 rng(12);
    const CMatrix x = random_unitary(2, rng);
    std::vector<SymbolFunction> f{quarter_symbol(), SymbolFunction::constant(0.4)};
    const Environment a = make_environment({0.3, 2.0}, x, f);
    const Environment b = make_environment(a.u, f);
    for (int i = 0; i < 2; ++i) {
        EXPECT_NEAR(a.gamma[i], b.gamma[i], 1e-12);
        EXPECT_LT(operator_norm(a.projector(i) - b.projector(i)), 1e-12);
    }
}

TEST(Environment, RejectsDegenerateOrNonUnitaryU) {
    std::vector<SymbolFunction> f(2, SymbolFunction::constant(0.4));
    EXPECT_THROW(make_environment(CMatrix::Identity(2, 2), f), ValidationError);
    CMatrix u = CMatrix::Identity(2, 2);
    u(0, 0) = 1.1;
    EXPECT_THROW(make_environment(u, f), ValidationError);
    std::mt19937_64 rng(13);
    EXPECT_THROW(make_environment(random_unitary(2, rng), {SymbolFunction::constant(0.4)}), ValidationError);
}

TEST(Environment, WeightsSumToOne) {
    std::mt19937_64 rng(14);
    const Environment env = random_environment(3, 1, rng);
    const auto w = env.weights(random_unit(3, rng));
    EXPECT_NEAR(w[0] + w[1] + w[2], 1.0, 1e-14);
}

// Contour and series routes to F(B) on random contractions.
TEST(Evaluation, SeriesMatchesContour) {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> ud(0.2, 0.9);
    for (int k = 0; k < 20; ++k) {
        const int d = 2 + k % 5;
        const CMatrix b = ud(rng) * random_unitary(d, rng) * random_density(d, rng);
        const SymbolFunction f = random_symbol(1 + k % 3, rng);
        const double r = 0.5 * (1.0 + spectral_radius(b));
        const CMatrix s = eval_series(f, b), c = eval_contour(f, b, r, 256);
        EXPECT_LT(operator_norm(s - c), 1e-10);
    }
}

TEST(Evaluation, DomainChecks) {
    const SymbolFunction f = quarter_symbol();
    EXPECT_THROW(eval_series(f, 1.5 * CMatrix::Identity(2, 2)), DomainError);
    const CMatrix b = 0.5 * CMatrix::Identity(2, 2);
    EXPECT_THROW(eval_contour(f, b, 0.4, 64), DomainError);
    EXPECT_THROW(eval_contour(f, b, 0.8, 16), ValidationError);
    EXPECT_THROW(eval_contour(f, b, 1.2, 64), ValidationError);
}

TEST(TruncatedSymbol, MatchesCoefficientDefinition) {
    // c_i(ℓ) = ⟨δ_0⊗x_i, Σ (S⊗U)^ℓ δ_0⊗x_i⟩ and (S⊗U)^ℓ δ_0⊗x_i = e^{iℓγ_i} δ_{−ℓ}⊗x_i
    std::mt19937_64 rng(16);
    const Environment env = random_environment(2, 3, rng);
    const int a = -5, b = 5, m = env.m;
    const auto ts = build_truncated_symbol(env, a, b);
    for (int i = 0; i < m; ++i)
        for (int l = 0; l <= 3; ++l) {
            CVector e0 = CVector::Zero(ts.sigma.rows()), el = e0;
            e0.segment((0 - a) * m, m) = env.x.col(i);
            el.segment((-l - a) * m, m) = std::polar(1.0, l * env.gamma[i]) * env.x.col(i);
            EXPECT_LT(std::abs(e0.dot(ts.sigma * el) - env.f[i].coefficient(l)), 1e-14) << i << " " << l;
        }
}

TEST(TruncatedSymbol, HermitianBoundedAndCommutesWithProjectors) {
    std::mt19937_64 rng(17);
    const Environment env = random_environment(2, 2, rng);
    const auto ts = build_truncated_symbol(env, -10, 10);
    EXPECT_LT(hermiticity_defect(ts.sigma), 1e-14);
    const RVector ev = hermitian_eigenvalues(ts.sigma);
    EXPECT_GE(ev(0), -1e-12);
    EXPECT_LE(ev(ev.size() - 1), 1.0 + 1e-12);
    const int len = 21;
    for (int i = 0; i < 2; ++i) {
        CMatrix p = CMatrix::Zero(len * 2, len * 2);
        for (int k = 0; k < len; ++k) p.block(2 * k, 2 * k, 2, 2) = env.projector(i);
        EXPECT_LT(operator_norm(p * ts.sigma - ts.sigma * p), 1e-14);
    }
    EXPECT_FALSE(ts.truncation_warning);
    EXPECT_TRUE(build_truncated_symbol(env, -1, 1).truncation_warning);
}
