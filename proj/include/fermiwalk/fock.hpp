#pragma once

// Exact many-body oracle on the 2^D Fock space of a small periodic window.
//
// Modes are ordered environment first (site-major, as in JointOperator),
// then the sample. Occupation basis |n⟩ = (c*_0)^{n_0}(c*_1)^{n_1}…|0⟩ with
// bit j of the index holding n_j. States are kept as a weighted ensemble of
// pure vectors, which is the same thing as a density matrix but far cheaper.

#include "fermiwalk/simulate.hpp"

#include <bit>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace fermiwalk {

inline constexpr int kMaxFockModes = 14;

namespace fock {

inline double jw_sign(std::uint32_t state, int j) {
    return (std::popcount(state & ((1u << j) - 1u)) & 1) ? -1.0 : 1.0;
}

/// y += c*(f) x, with c*(f) = Σ_j f_j c*_j.
inline void add_create(const CVector& f, const CVector& x, CVector& y, int offset = 0) {
    const auto dim = static_cast<std::uint32_t>(x.size());
    for (Eigen::Index k = 0; k < f.size(); ++k) {
        if (f(k) == 0.0) continue;
        const int j = offset + static_cast<int>(k);
        const std::uint32_t bit = 1u << j;
        for (std::uint32_t s = 0; s < dim; ++s)
            if (!(s & bit) && x(s) != 0.0) y(s | bit) += f(k) * jw_sign(s, j) * x(s);
    }
}

/// y += c(f) x, with c(f) = Σ_j conj(f_j) c_j.
inline void add_annihilate(const CVector& f, const CVector& x, CVector& y, int offset = 0) {
    const auto dim = static_cast<std::uint32_t>(x.size());
    for (Eigen::Index k = 0; k < f.size(); ++k) {
        if (f(k) == 0.0) continue;
        const int j = offset + static_cast<int>(k);
        const std::uint32_t bit = 1u << j;
        for (std::uint32_t s = 0; s < dim; ++s)
            if ((s & bit) && x(s) != 0.0) y(s & ~bit) += std::conj(f(k)) * jw_sign(s, j) * x(s);
    }
}

inline CVector create(const CVector& f, const CVector& x, int offset = 0) {
    CVector y = CVector::Zero(x.size());
    add_create(f, x, y, offset);
    return y;
}

inline CVector annihilate(const CVector& f, const CVector& x, int offset = 0) {
    CVector y = CVector::Zero(x.size());
    add_annihilate(f, x, y, offset);
    return y;
}

/// Γ(A) on the 2^k space of k modes: entry (n', n) is the minor of A with
/// rows n', columns n (both ascending), zero unless popcounts agree.
inline CSparse second_quantize(const CMatrix& a) {
    const int k = static_cast<int>(a.rows());
    const std::uint32_t dim = 1u << k;
    std::vector<std::vector<std::uint32_t>> by_count(k + 1);
    for (std::uint32_t s = 0; s < dim; ++s) by_count[std::popcount(s)].push_back(s);
    std::vector<Eigen::Triplet<cplx>> trip;
    auto members = [](std::uint32_t s) {
        std::vector<int> out;
        for (int j = 0; s; ++j, s >>= 1)
            if (s & 1u) out.push_back(j);
        return out;
    };
    for (int p = 0; p <= k; ++p) {
        for (std::uint32_t col : by_count[p]) {
            const auto cj = members(col);
            for (std::uint32_t row : by_count[p]) {
                cplx det{1.0, 0.0};
                if (p > 0) {
                    const auto rj = members(row);
                    CMatrix sub(p, p);
                    for (int r = 0; r < p; ++r)
                        for (int c = 0; c < p; ++c) sub(r, c) = a(rj[r], cj[c]);
                    det = sub.determinant();
                }
                if (std::abs(det) > 1e-15) trip.emplace_back(row, col, det);
            }
        }
    }
    CSparse g(dim, dim);
    g.setFromTriplets(trip.begin(), trip.end());
    return g;
}

} // namespace fock

/// Weighted ensemble of normalized pure states.
struct FockEnsemble {
    std::vector<double> weights;
    std::vector<CVector> states;
};

class FockModel {
public:
    /// Window must be periodic so the one-particle step is unitary.
    FockModel(const Environment& env, const Walk& walk, const CouplingSpec& coupling, Window window)
        : env_(env), walk_(walk), coupling_(coupling), op_(env, walk, coupling, window) {
        if (!window.periodic) throw ValidationError("fock oracle: window must be periodic");
        de_ = static_cast<int>(op_.env_dim());
        d_ = static_cast<int>(walk.dim());
        if (de_ + d_ > kMaxFockModes)
            throw ValidationError("fock oracle: D = " + std::to_string(de_ + d_) + " exceeds " +
                                  std::to_string(kMaxFockModes));

        // free one-particle parts
        const CMatrix t0 = JointOperator(env, walk, CouplingSpec{0.0, coupling.v}, window).dense();
        g_env_ = fock::second_quantize(t0.topLeftCorner(de_, de_));
        g_walk_t_ = CSparse(fock::second_quantize(walk.w).transpose());
        u_ = CVector::Zero(de_);
        u_.segment(op_.site_offset(0), env.m) = coupling.v;
        check_car();
    }

    int modes() const { return de_ + d_; }
    int env_modes() const { return de_; }
    int sample_modes() const { return d_; }
    std::uint32_t dim() const { return 1u << modes(); }
    const JointOperator& op() const { return op_; }

    /// Gaussian ensemble for the covariance Σ_w ⊕ Ξ, decomposed per block.
    FockEnsemble gaussian_state(const CMatrix& gamma0, int max_configs = 1 << 16) const {
        const CMatrix senv = gamma0.topLeftCorner(de_, de_);
        const CMatrix xi = gamma0.bottomRightCorner(d_, d_);
        if (gamma0.topRightCorner(de_, d_).norm() > 1e-14)
            throw ValidationError("fock oracle: initial covariance must be block diagonal");
        std::vector<std::pair<double, CVector>> modes; // (λ, orbital in joint space)
        auto collect = [&](const CMatrix& block, int offset) {
            Eigen::SelfAdjointEigenSolver<CMatrix> es(real_part(block));
            for (Eigen::Index k = 0; k < block.rows(); ++k) {
                CVector f = CVector::Zero(de_ + d_);
                f.segment(offset, block.rows()) = es.eigenvectors().col(k);
                double l = es.eigenvalues()(k);
                if (l < 1e-13) l = 0.0;
                if (l > 1.0 - 1e-13) l = 1.0;
                modes.emplace_back(l, f);
            }
        };
        collect(senv, 0);
        collect(xi, de_);

        std::vector<int> frac, full;
        for (std::size_t k = 0; k < modes.size(); ++k) {
            if (modes[k].first == 1.0) full.push_back(static_cast<int>(k));
            else if (modes[k].first > 0.0) frac.push_back(static_cast<int>(k));
        }
        if (frac.size() > 30 || (1ull << frac.size()) > static_cast<unsigned long long>(max_configs))
            throw ValidationError("fock oracle: Gaussian state needs 2^" + std::to_string(frac.size()) +
                                  " configurations");

        FockEnsemble ens;
        CVector vac = CVector::Zero(dim());
        vac(0) = 1.0;
        for (std::uint64_t mask = 0; mask < (1ull << frac.size()); ++mask) {
            double w = 1.0;
            CVector x = vac;
            for (int k : full) x = fock::create(modes[k].second, x);
            for (std::size_t b = 0; b < frac.size(); ++b) {
                const double l = modes[frac[b]].first;
                if (mask >> b & 1u) {
                    w *= l;
                    x = fock::create(modes[frac[b]].second, x);
                } else {
                    w *= 1.0 - l;
                }
            }
            if (w == 0.0) continue;
            ens.weights.push_back(w);
            ens.states.push_back(x / x.norm());
        }
        return ens;
    }

    /// One coupled step: Φ ← Γ(S⊗U ⊕ W) K_α Φ.
    void step(FockEnsemble& ens) const {
        for (CVector& x : ens.states) {
            x = apply_k(x);
            x = apply_free(x);
        }
    }

    /// Γ_{ji} = ω(c*_i c_j) = ⟨c_i Φ, c_j Φ⟩, averaged over the ensemble.
    CMatrix two_point(const FockEnsemble& ens) const {
        const int dm = modes();
        CMatrix g = CMatrix::Zero(dm, dm);
        for (std::size_t e = 0; e < ens.states.size(); ++e) {
            CMatrix c(dim(), dm);
            for (int j = 0; j < dm; ++j) c.col(j) = fock::annihilate(basis_vector(dm, j), ens.states[e]);
            g += ens.weights[e] * (c.adjoint() * c).transpose();
        }
        return g;
    }

    /// ⟨Φ, c*(f) Φ⟩ averaged; f a joint-space vector.
    cplx create_expectation(const FockEnsemble& ens, const CVector& f) const {
        cplx s{0.0, 0.0};
        for (std::size_t e = 0; e < ens.states.size(); ++e)
            s += ens.weights[e] * ens.states[e].dot(fock::create(f, ens.states[e]));
        return s;
    }

    double total_number(const FockEnsemble& ens) const {
        double s = 0.0;
        for (std::size_t e = 0; e < ens.states.size(); ++e)
            for (std::uint32_t b = 0; b < dim(); ++b) s += ens.weights[e] * std::norm(ens.states[e](b)) * std::popcount(b);
        return s;
    }

    /// Distribution of the number of particles in the sample.
    std::vector<double> sample_number_distribution(const FockEnsemble& ens) const {
        std::vector<double> p(d_ + 1, 0.0);
        for (std::size_t e = 0; e < ens.states.size(); ++e)
            for (std::uint32_t b = 0; b < dim(); ++b) p[std::popcount(b >> de_)] += ens.weights[e] * std::norm(ens.states[e](b));
        return p;
    }

    CVector apply_free(const CVector& x) const {
        const Eigen::Index re = Eigen::Index{1} << de_, rs = Eigen::Index{1} << d_;
        const Eigen::Map<const CMatrix> xm(x.data(), re, rs);
        CMatrix y = g_env_ * xm;
        y = y * g_walk_t_;
        return Eigen::Map<CVector>(y.data(), y.size());
    }

    /// K_α = 1 + (cos α − 1)H² − i sin α H, H = b*(u)a(ψ*) + a*(ψ*)b(u).
    CVector apply_k(const CVector& x) const {
        const double c = std::cos(coupling_.alpha), s = std::sin(coupling_.alpha);
        const CVector hx = apply_h(x);
        return x + (c - 1.0) * apply_h(hx) - I * s * hx;
    }

    CVector apply_h(const CVector& x) const {
        CVector y = fock::create(u_, fock::annihilate(walk_.star, x, de_));
        y += fock::create(walk_.star, fock::annihilate(u_, x), de_);
        return y;
    }

private:
    void check_car() const {
        // anticommutators on a random vector, for every pair of modes
        std::mt19937_64 rng(12345);
        std::normal_distribution<double> nd;
        CVector x(dim());
        for (std::uint32_t b = 0; b < dim(); ++b) x(b) = cplx(nd(rng), nd(rng));
        x.normalize();
        const int dm = modes();
        double worst = 0.0;
        for (int i = 0; i < dm; ++i)
            for (int j = 0; j < dm; ++j) {
                const CVector ei = basis_vector(dm, i), ej = basis_vector(dm, j);
                const CVector a1 = fock::annihilate(ei, fock::create(ej, x)) + fock::create(ej, fock::annihilate(ei, x));
                worst = std::max(worst, (a1 - (i == j ? 1.0 : 0.0) * x).norm());
                const CVector a2 = fock::annihilate(ei, fock::annihilate(ej, x)) + fock::annihilate(ej, fock::annihilate(ei, x));
                worst = std::max(worst, a2.norm());
            }
        if (worst > 1e-12) throw DomainError("fock oracle: CAR check failed (" + std::to_string(worst) + ")");
    }

    Environment env_;
    Walk walk_;
    CouplingSpec coupling_;
    JointOperator op_;
    int de_ = 0, d_ = 0;
    CSparse g_env_, g_walk_t_;
    CVector u_;
};

} // namespace fermiwalk
