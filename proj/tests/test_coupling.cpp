#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace fwtest;

namespace {
// exp(−iα(ι + ι*)) on the joint space, by eigendecomposition of the generator
CMatrix coupling_exponential(const JointOperator& op, double alpha) {
    const CVector u = op.u_vector(), s = op.s_vector();
    const CMatrix h = u * s.adjoint() + s * u.adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    CVector ph(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k) ph(k) = std::polar(1.0, -alpha * es.eigenvalues()(k));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}
} // namespace

TEST(Contraction, FormulaAndNorm) {
    std::mt19937_64 rng(21);
    const Walk w = random_cycle_walk(3, rng);
    const double alpha = 0.6;
    const CMatrix p = w.star * w.star.adjoint();
    const CMatrix m = build_contraction(w.w, w.star, alpha);
    EXPECT_LT(operator_norm(m - w.w * (CMatrix::Identity(6, 6) + (std::cos(alpha) - 1.0) * p)), 1e-15);
    EXPECT_LE(operator_norm(m), 1.0 + 1e-14);
}

TEST(Contraction, IdentityWalkHasUnitSpectralRadius) {
    const Walk w = cycle_walk(std::vector<CMatrix>(3, CMatrix::Identity(2, 2)));
    WalkSpec s;
    s.kind = WalkKind::raw;
    s.raw = CMatrix::Identity(6, 6);
    const Walk id = build_walk(s);
    EXPECT_NEAR(make_contraction(id.w, id.star, std::numbers::pi / 3).spr, 1.0, 1e-12);
    EXPECT_NEAR(make_contraction(w.w, w.star, std::numbers::pi / 3).spr, 1.0, 1e-12);
}

// spr(M) < 1 exactly when ψ* is cyclic and α ∉ πZ
TEST(Contraction, SpectralRadiusCriterion) {
    std::mt19937_64 rng(22);
    for (int k = 0; k < 20; ++k) {
        const Walk w = random_cycle_walk(2 + k % 4, rng);
        ASSERT_TRUE(is_cyclic(w.w, w.star).cyclic);
        EXPECT_LT(make_contraction(w.w, w.star, 0.8).spr, 1.0 - 1e-6);
        EXPECT_NEAR(make_contraction(w.w, w.star, std::numbers::pi).spr, 1.0, 1e-12);
    }
    const Walk h = hadamard_walk(4); // not cyclic
    EXPECT_NEAR(make_contraction(h.w, h.star, 0.8).spr, 1.0, 1e-10);
}

TEST(Contraction, DecayCertificateBoundsPowers) {
    const Walk w = fast_walk_n4();
    const Contraction c = make_contraction(w.w, w.star, std::numbers::pi / 4);
    ASSERT_LT(c.spr, 1.0);
    CMatrix pw = CMatrix::Identity(8, 8);
    for (int t = 1; t <= 3 * c.cert.t0; ++t) {
        pw = pw * c.m;
        EXPECT_LE(operator_norm(pw), c.cert.c * std::pow(c.cert.q, t) * (1 + 1e-9)) << t;
    }
    const int tt = c.cert.truncation(1e-9);
    EXPECT_LE(c.cert.c * std::pow(c.cert.q, tt), 1e-9);
    EXPECT_GE(tt, c.cert.t0);
}

TEST(Coupling, Validation) {
    EXPECT_THROW(validate_coupling(CouplingSpec{0.3, CVector::Ones(2)}, 2), ValidationError);
    EXPECT_THROW(validate_coupling(CouplingSpec{0.3, CVector::Ones(1)}, 2), ValidationError);
    EXPECT_THROW(validate_coupling(CouplingSpec{std::nan(""), CVector::Ones(1)}, 1), ValidationError);
    EXPECT_THROW(require_nondegenerate_alpha(2 * std::numbers::pi), DomainError);
    EXPECT_NO_THROW(require_nondegenerate_alpha(0.1));
}

TEST(JointOperator, WindowMustContainSiteZero) {
    const Walk w = hadamard_walk(2);
    const Environment env = make_environment(CMatrix::Identity(1, 1), {quarter_symbol()});
    const CouplingSpec c{0.5, CVector::Ones(1)};
    EXPECT_THROW(JointOperator(env, w, c, Window{0, 3, false}), ValidationError);
    EXPECT_THROW(JointOperator(env, w, c, Window{-3, 0, false}), ValidationError);
}

TEST(JointOperator, MatchesFreeStepTimesExponential) {
    std::mt19937_64 rng(23);
    const Walk w = random_cycle_walk(2, rng);
    const Environment env = random_environment(2, 1, rng);
    const CouplingSpec c = coupling(0.9, env, rng);
    const Window win{-3, 4, true};
    const JointOperator op(env, w, c, win);
    const CMatrix t = op.dense();
    EXPECT_LT(unitarity_defect(t), 1e-13);

    // free part: δ_ℓ ↦ δ_{ℓ−1} with U, wrapped; W on the sample
    const int len = win.length(), m = 2;
    CMatrix g = CMatrix::Zero(op.dim(), op.dim());
    for (int k = 0; k < len; ++k) {
        const int to = (k - 1 + len) % len;
        g.block(to * m, k * m, m, m) = env.u;
    }
    g.bottomRightCorner(4, 4) = w.w;
    EXPECT_LT(operator_norm(t - g * coupling_exponential(op, c.alpha)), 1e-13);
}

TEST(JointOperator, ZeroCouplingIsBlockDiagonal) {
    const Walk w = hadamard_walk(2);
    const Environment env = make_environment(CMatrix::Identity(1, 1), {quarter_symbol()});
    const JointOperator op(env, w, CouplingSpec{0.0, CVector::Ones(1)}, Window{-2, 2, false});
    const CMatrix t = op.dense();
    EXPECT_EQ(t.topRightCorner(5, 4).norm(), 0.0);
    EXPECT_EQ(t.bottomLeftCorner(4, 5).norm(), 0.0);
    EXPECT_LT(operator_norm(t.bottomRightCorner(4, 4) - w.w), 1e-15);
}
