#pragma once

// Interaction between the sample and the reservoir site 0.
//
// ι : C^d → ℓ²(Z)⊗C^m, ψ ↦ δ_0⊗v ⟨ψ*, ψ⟩, P = ι*ι = |ψ*⟩⟨ψ*|.
// The one-particle joint step is T = (S⊗U ⊕ W)·exp(−iα(ι + ι*)), where S is
// the shift δ_ℓ ↦ δ_{ℓ−1}. The exponential is a rotation on
// span{δ_0⊗v, ψ*} and the identity elsewhere.

#include "fermiwalk/environment.hpp"
#include "fermiwalk/walk.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace fermiwalk {

inline constexpr double kMinSinAlpha = 1e-8;

struct CouplingSpec {
    double alpha = 0.0;
    CVector v; ///< unit vector in C^m
};

inline void validate_coupling(const CouplingSpec& c, int m) {
    if (!std::isfinite(c.alpha)) throw ValidationError("coupling: alpha must be finite");
    if (c.v.size() != m)
        throw ValidationError("coupling: v has dimension " + std::to_string(c.v.size()) + ", expected m = " +
                              std::to_string(m));
    if (std::abs(c.v.norm() - 1.0) > 1e-12) throw ValidationError("coupling: v must have unit norm");
}

/// Asymptotic formulas need α ∉ πZ.
inline void require_nondegenerate_alpha(double alpha) {
    if (!(std::abs(std::sin(alpha)) > kMinSinAlpha))
        throw DomainError("coupling: |sin(alpha)| = " + std::to_string(std::abs(std::sin(alpha))) +
                          " too small; alpha must not be a multiple of pi");
}

/// M = W(1 + (cos α − 1)P).
inline CMatrix build_contraction(const CMatrix& w, const CVector& star, double alpha) {
    if (w.rows() != w.cols() || star.size() != w.rows()) throw ValidationError("build_contraction: dimension mismatch");
    return w + (std::cos(alpha) - 1.0) * (w * star) * star.adjoint();
}

/// ‖M^t‖ ≤ C q^t, fitted for t ≤ t0.
struct DecayCertificate {
    int t0 = 0;
    double c = 1.0;
    double q = 1.0;

    /// Smallest T ≥ t0 with C q^T ≤ tol.
    int truncation(double tol) const {
        if (!(q < 1.0)) throw DomainError("decay certificate: q >= 1, series do not converge");
        const double t = std::ceil(std::log(tol / c) / std::log(q));
        return std::max(t0, static_cast<int>(std::max(t, 0.0)));
    }
};

inline DecayCertificate decay_certificate(const CMatrix& m, double spr) {
    DecayCertificate cert;
    cert.t0 = static_cast<int>(4 * m.rows());
    cert.q = spr + 1e-6;
    cert.c = 1.0;
    CMatrix power = CMatrix::Identity(m.rows(), m.cols());
    for (int t = 1; t <= cert.t0; ++t) {
        power = power * m;
        cert.c = std::max(cert.c, operator_norm(power) / std::pow(cert.q, t));
    }
    return cert;
}

struct Contraction {
    CMatrix m;
    double spr = 1.0;
    DecayCertificate cert;

    bool contracting() const { return spr < 1.0; }

    void require_contracting() const {
        if (!(spr < 1.0 - 1e-12))
            throw DomainError("spr(M) = " + std::to_string(spr) +
                              " is not below 1; psi* not cyclic or alpha in pi*Z");
    }
};

inline Contraction make_contraction(const CMatrix& w, const CVector& star, double alpha) {
    Contraction c;
    c.m = build_contraction(w, star, alpha);
    c.spr = spectral_radius(c.m);
    c.cert = decay_certificate(c.m, c.spr);
    return c;
}

struct Window {
    int a = 0, b = 0;
    bool periodic = false; ///< wrap δ_a ↦ δ_b instead of dropping it
    int length() const { return b - a + 1; }
};

/// The joint step T on (window ⊗ C^m) ⊕ C^d. Environment block first,
/// index (ℓ − a)·m + j, then the sample block.
class JointOperator {
public:
    JointOperator(const Environment& env, const Walk& walk, const CouplingSpec& coupling, Window window)
        : u_(env.u), w_(walk.w), star_(walk.star), v_(coupling.v), window_(window), m_(env.m) {
        validate_coupling(coupling, env.m);
        if (!(window.a < 0 && window.b > 0))
            throw ValidationError("joint operator: site 0 must lie strictly inside the window [" +
                                  std::to_string(window.a) + ", " + std::to_string(window.b) + "]");
        const double c = std::cos(coupling.alpha), s = std::sin(coupling.alpha);
        bmat_ << c - 1.0, -I * s, -I * s, c - 1.0; // R − 1 on (u, s)
    }

    Eigen::Index env_dim() const { return static_cast<Eigen::Index>(window_.length()) * m_; }
    Eigen::Index sample_dim() const { return w_.rows(); }
    Eigen::Index dim() const { return env_dim() + sample_dim(); }
    Eigen::Index site_offset(int site) const { return static_cast<Eigen::Index>(site - window_.a) * m_; }
    const Window& window() const { return window_; }
    int m() const { return m_; }

    /// δ_0⊗v embedded in the joint space.
    CVector u_vector() const {
        CVector out = CVector::Zero(dim());
        out.segment(site_offset(0), m_) = v_;
        return out;
    }

    /// 0⊕ψ*.
    CVector s_vector() const {
        CVector out = CVector::Zero(dim());
        out.tail(sample_dim()) = star_;
        return out;
    }

    /// Y ← T·Y, column by column.
    void apply(CMatrix& y) const {
        const Eigen::Index n0 = site_offset(0);
        const Eigen::Index es = env_dim();
        const Eigen::Index d = sample_dim();
        // coupling rotation as a rank-2 update
        Eigen::Matrix<cplx, 2, Eigen::Dynamic> z(2, y.cols());
        z.row(0) = v_.adjoint() * y.middleRows(n0, m_);
        z.row(1) = star_.adjoint() * y.middleRows(es, d);
        const Eigen::Matrix<cplx, 2, Eigen::Dynamic> bz = bmat_ * z;
        y.middleRows(n0, m_) += v_ * bz.row(0);
        y.middleRows(es, d) += star_ * bz.row(1);

        // free step: site ℓ goes to ℓ−1 with U on the internal factor
        const int len = window_.length();
        CMatrix first = y.middleRows(0, m_); // site a
        for (int k = 0; k + 1 < len; ++k)
            y.middleRows(static_cast<Eigen::Index>(k) * m_, m_) =
                u_ * y.middleRows(static_cast<Eigen::Index>(k + 1) * m_, m_);
        if (window_.periodic)
            y.middleRows(static_cast<Eigen::Index>(len - 1) * m_, m_) = u_ * first;
        else
            y.middleRows(static_cast<Eigen::Index>(len - 1) * m_, m_).setZero();
        y.middleRows(es, d) = w_ * y.middleRows(es, d);
    }

    CMatrix dense() const {
        CMatrix t = CMatrix::Identity(dim(), dim());
        apply(t);
        return t;
    }

private:
    CMatrix u_, w_;
    CVector star_, v_;
    Window window_;
    int m_;
    Eigen::Matrix2cd bmat_;
};

/// T*^{T+1} restricted to the sample, split into its environment part
/// X = i sin α Σ_{t'=0}^{T} (S⊗U)^{t'+1} ι W* M*^{t'} on sites [−(T+1), 0]
/// and its sample part Y = M*^{T+1}. Once a particle leaves into the
/// reservoir it never returns under T*, hence the clean split. As T → ∞,
/// X tends to the Møller block and Y to 0.
struct MollerBlock {
    Window window;
    int truncation = 0;
    CMatrix x; ///< (len·m) × d
    CMatrix y; ///< d × d
};

inline MollerBlock moller_sample_block(const Environment& env, const Walk& walk, const CouplingSpec& coupling,
                                       const Contraction& contraction, int truncation) {
    validate_coupling(coupling, env.m);
    contraction.require_contracting();
    if (truncation < 0) throw ValidationError("moller_sample_block: truncation must be >= 0");
    const int m = env.m;
    const Eigen::Index d = walk.dim();
    MollerBlock out;
    out.truncation = truncation;
    out.window = Window{-(truncation + 1), 0, false};
    out.x = CMatrix::Zero(static_cast<Eigen::Index>(out.window.length()) * m, d);

    const double s = std::sin(coupling.alpha);
    CVector uv = coupling.v;         // U^{t'+1} v
    CVector g = walk.w * walk.star;  // M^{t'} W ψ*
    for (int tp = 0; tp <= truncation; ++tp) {
        uv = env.u * uv;
        const int site = -(tp + 1);
        const Eigen::Index off = static_cast<Eigen::Index>(site - out.window.a) * m;
        // ι W* M*^{t'} e_j = δ_0⊗v · conj((M^{t'} W ψ*)_j)
        out.x.middleRows(off, m) += (I * s) * uv * g.adjoint();
        g = contraction.m * g;
    }
    out.y = CMatrix::Identity(d, d);
    for (int tp = 0; tp <= truncation; ++tp) out.y = out.y * contraction.m.adjoint();
    return out;
}

/// X*ΣX + Y*ΞY: the sample symbol after T+1 steps from Σ_w ⊕ Ξ, exact up
/// to the reservoir beyond the window (which X never reaches).
inline CMatrix moller_sample_state(const Environment& env, const MollerBlock& mb, const CMatrix& xi) {
    if (xi.rows() != mb.y.rows() || xi.cols() != mb.y.cols())
        throw ValidationError("moller_sample_state: Xi has wrong shape");
    const auto sym = build_truncated_symbol(env, mb.window.a, mb.window.b);
    return mb.x.adjoint() * sym.sigma * mb.x + mb.y.adjoint() * xi * mb.y;
}

} // namespace fermiwalk
