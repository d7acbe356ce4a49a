#pragma once

// Covariance propagation of the truncated joint system, plus the explicit
// finite-time sums for pair expectations.
//
// Γ_{t+1} = T Γ_t T*, with ω_t(a*(f) a(g)) = ⟨g, Γ_t f⟩.

#include "fermiwalk/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fermiwalk {

struct CovarianceOptions {
    std::optional<Window> window; ///< default: sized from the step budget
    bool periodic = false;
    double leakage_tolerance = 1e-10;
};

/// Window [a, b] with length 2·steps + 4·L_max + 8.
inline Window auto_window(int steps, int l_max, bool periodic = false) {
    const int half = steps + 2 * l_max + 4;
    return Window{-half, half - 1, periodic};
}

namespace detail {

/// κ̃(ℓ) = ⟨δ_0⊗v, Σ (S⊗U)^ℓ δ_0⊗v⟩, extended by Hermiticity to ℓ < 0.
inline cplx kappa_ext(const Environment& env, const std::vector<double>& w, int l) {
    return l >= 0 ? env.kappa(w, l) : std::conj(env.kappa(w, -l));
}

/// Block ⟨δ_{k+ℓ}⊗·, Σ δ_k⊗·⟩ as an m×m matrix.
inline CMatrix symbol_block(const Environment& env, int l) {
    CMatrix b = CMatrix::Zero(env.m, env.m);
    if (std::abs(l) > env.l_max()) return b;
    for (int i = 0; i < env.m; ++i) b += symbol_entry(env, i, l) * env.projector(i);
    return b;
}

} // namespace detail

/// Joint covariance on the window, stored in the co-moving frame of the
/// free environment dynamics G = S⊗U:
///   Γ_t = G^t Γ̃_t G^{−t}   (G acts trivially on the sample).
/// Label L sits at site L − t (periodic: wrapped into [a, b]). One step is
///   Γ̃ ← (1 ⊕ W) Ẽ_t Γ̃ Ẽ_t* (1 ⊕ W*),  Ẽ_t = G^{−t} E G^t,
/// which couples ψ* to δ_{label of site 0} ⊗ U^{−t}v. The open boundary of
/// S_w drops the label leaving site a. Each step is O(N·(m + d)) instead of
/// the O(N²·m) of forming TΓT* directly.
class CovarianceState {
public:
    CovarianceState(const Environment& env, const Walk& walk, const CouplingSpec& coupling, const CMatrix& xi,
                    int step_budget, CovarianceOptions opts = {})
        : op_(env, walk, coupling, choose_window(opts, step_budget, env.l_max())), u_(env.u),
          w_(walk.w), star_(walk.star), l_max_(env.l_max()), tol_(opts.leakage_tolerance) {
        const Eigen::Index d = walk.dim();
        if (xi.rows() != d || xi.cols() != d) throw ValidationError("covariance: Xi has wrong shape");
        if (hermiticity_defect(xi) > 1e-12) throw ValidationError("covariance: Xi is not Hermitian");
        const RVector ev = hermitian_eigenvalues(xi);
        if (ev(0) < -1e-12 || ev(ev.size() - 1) > 1.0 + 1e-12)
            throw ValidationError("covariance: Xi must satisfy 0 <= Xi <= 1");
        if (!(tol_ > 0)) throw ValidationError("covariance: leakage tolerance must be positive");

        const Window& w = op_.window();
        const auto sym = build_truncated_symbol(env, w.a, w.b);
        g_ = CMatrix::Zero(op_.dim(), op_.dim());
        g_.topLeftCorner(op_.env_dim(), op_.env_dim()) = sym.sigma;
        g_.bottomRightCorner(d, d) = xi;
        if (w.periodic) {
            // wrap the symbol so the ring is translation invariant
            const int len = w.length();
            const int m = env.m;
            for (int k = 0; k < len; ++k)
                for (int l = -l_max_; l <= l_max_; ++l) {
                    const int row = k + l;
                    if (row >= 0 && row < len) continue;
                    const int wrapped = ((row % len) + len) % len;
                    g_.block(static_cast<Eigen::Index>(wrapped) * m, static_cast<Eigen::Index>(k) * m, m, m) +=
                        detail::symbol_block(env, l);
                }
        }
        const double c = std::cos(coupling.alpha), s = std::sin(coupling.alpha);
        bmat_ << c - 1.0, -I * s, -I * s, c - 1.0;
        v_t_ = coupling.v;
        u_pow_ = CMatrix::Identity(env.m, env.m);
        leakage_ = compute_leakage();
    }

    const JointOperator& op() const { return op_; }
    int time() const { return t_; }
    double leakage() const { return leakage_; }

    /// Steps the open window can take. Right end: the vacuum front must stay
    /// L_max + 1 sites clear of the coupling site. Left end: after t steps
    /// the sample is correlated with sites down to −t − L_max, which must
    /// stay off the two monitored edge sites.
    int step_budget() const {
        if (op_.window().periodic) return std::numeric_limits<int>::max();
        return std::min(op_.window().b, -op_.window().a) - l_max_ - 2;
    }

    void step() {
        if (t_ + 1 > step_budget())
            throw DomainError("covariance: step " + std::to_string(t_ + 1) + " exceeds the window budget " +
                              std::to_string(step_budget()) + "; enlarge the window");
        const int m = op_.m();
        const Eigen::Index es = op_.env_dim(), d = op_.sample_dim();
        const Eigen::Index r0 = row_of_label(label_at(0));

        // Γ ← Ẽ Γ Ẽ*, Ẽ = 1 + Q B Q*, Q = [δ⊗U^{−t}v, ψ*]
        Eigen::Matrix<cplx, 2, Eigen::Dynamic> z(2, g_.cols());
        z.row(0) = v_t_.adjoint() * g_.middleRows(r0, m);
        z.row(1) = star_.adjoint() * g_.middleRows(es, d);
        Eigen::Matrix<cplx, 2, Eigen::Dynamic> bz = bmat_ * z;
        g_.middleRows(r0, m) += v_t_ * bz.row(0);
        g_.middleRows(es, d) += star_ * bz.row(1);
        Eigen::Matrix<cplx, Eigen::Dynamic, 2> y(g_.rows(), 2);
        y.col(0) = g_.middleCols(r0, m) * v_t_;
        y.col(1) = g_.middleCols(es, d) * star_;
        const Eigen::Matrix<cplx, Eigen::Dynamic, 2> yb = y * bmat_.adjoint();
        g_.middleCols(r0, m) += yb.col(0) * v_t_.adjoint();
        g_.middleCols(es, d) += yb.col(1) * star_.adjoint();

        // sample step
        g_.middleRows(es, d) = w_ * g_.middleRows(es, d);
        g_.middleCols(es, d) = g_.middleCols(es, d) * w_.adjoint();

        // S_w drops whatever sits at site a
        if (!op_.window().periodic) {
            const int lab = label_at(op_.window().a);
            if (lab <= op_.window().b) {
                const Eigen::Index r = row_of_label(lab);
                g_.middleRows(r, m).setZero();
                g_.middleCols(r, m).setZero();
            }
        }

        ++t_;
        u_pow_ = u_pow_ * u_;
        v_t_ = u_pow_.adjoint() * op_v();
        if (t_ % 16 == 0) g_ = real_part(g_);
        leakage_ = compute_leakage();
        if (!op_.window().periodic && leakage_ > tol_)
            throw DomainError("covariance: boundary leakage " + std::to_string(leakage_) + " at t = " +
                              std::to_string(t_) + " exceeds tolerance; enlarge the window");
    }

    void evolve(int steps) {
        for (int k = 0; k < steps; ++k) step();
    }

    CMatrix sample_block() const {
        const auto d = op_.sample_dim();
        return g_.bottomRightCorner(d, d);
    }

    /// Lab-frame Γ_t on the whole window; O(N²·m).
    CMatrix gamma() const {
        const int len = op_.window().length();
        const int m = op_.m();
        const Eigen::Index es = op_.env_dim(), d = op_.sample_dim();
        // P maps label rows to site rows with U^t on the internal factor
        CMatrix out = CMatrix::Zero(op_.dim(), op_.dim());
        std::vector<Eigen::Index> src(len, -1);
        for (int k = 0; k < len; ++k) {
            const int lab = label_at(op_.window().a + k);
            if (lab >= op_.window().a && lab <= op_.window().b) src[k] = row_of_label(lab);
        }
        CMatrix rows = CMatrix::Zero(op_.dim(), op_.dim());
        for (int k = 0; k < len; ++k)
            if (src[k] >= 0) rows.middleRows(static_cast<Eigen::Index>(k) * m, m) = u_pow_ * g_.middleRows(src[k], m);
        rows.middleRows(es, d) = g_.middleRows(es, d);
        for (int k = 0; k < len; ++k)
            if (src[k] >= 0)
                out.middleCols(static_cast<Eigen::Index>(k) * m, m) = rows.middleCols(src[k], m) * u_pow_.adjoint();
        out.middleCols(es, d) = rows.middleCols(es, d);
        return out;
    }

    /// Lab-frame principal block of Γ_t on (sites ⊗ C^m) ⊕ C^d.
    CMatrix local_block(const std::vector<int>& sites) const {
        const int m = op_.m();
        const Eigen::Index es = op_.env_dim(), d = op_.sample_dim();
        const auto ns = static_cast<Eigen::Index>(sites.size());
        CMatrix p = CMatrix::Zero(ns * m + d, op_.dim()); // rows: lab coordinates, cols: co-moving
        for (Eigen::Index k = 0; k < ns; ++k) {
            const int lab = label_at(sites[k]);
            if (lab >= op_.window().a && lab <= op_.window().b)
                p.block(k * m, row_of_label(lab), m, m) = u_pow_;
        }
        p.block(ns * m, es, d, d) = CMatrix::Identity(d, d);
        return p * g_ * p.adjoint();
    }

    /// ⟨φ₂, Γ_t φ₁⟩ for lab-frame joint vectors.
    cplx pair(const CVector& phi1, const CVector& phi2) const {
        const CVector a = to_comoving(phi1), b = to_comoving(phi2);
        return b.dot(g_ * a);
    }

    /// Correlation weight between the sample and the two outermost sites
    /// on each end.
    double compute_leakage() const {
        const Window& w = op_.window();
        const int m = op_.m();
        const Eigen::Index es = op_.env_dim(), d = op_.sample_dim();
        double s = 0.0;
        for (int site : {w.a, w.a + 1, w.b - 1, w.b}) {
            const int lab = label_at(site);
            if (lab < w.a || lab > w.b) continue; // vacuum
            s += g_.block(row_of_label(lab), es, m, d).squaredNorm();
        }
        return std::sqrt(s);
    }

private:
    static Window choose_window(const CovarianceOptions& opts, int steps, int l_max) {
        if (steps < 0) throw ValidationError("covariance: step budget must be >= 0");
        if (!opts.window) return auto_window(steps, l_max, opts.periodic);
        Window w = *opts.window;
        w.periodic = opts.periodic;
        return w;
    }

    /// Label currently sitting at `site`; may fall outside [a, b] (vacuum).
    int label_at(int site) const {
        const Window& w = op_.window();
        if (!w.periodic) return site + t_;
        const int len = w.length();
        return w.a + (((site + t_ - w.a) % len) + len) % len;
    }

    Eigen::Index row_of_label(int lab) const { return op_.site_offset(lab); }

    CVector op_v() const { return op_.u_vector().segment(op_.site_offset(0), op_.m()); }

    CVector to_comoving(const CVector& phi) const {
        const int m = op_.m();
        const int len = op_.window().length();
        const Eigen::Index es = op_.env_dim(), d = op_.sample_dim();
        CVector out = CVector::Zero(op_.dim());
        for (int k = 0; k < len; ++k) {
            const int lab = label_at(op_.window().a + k);
            if (lab < op_.window().a || lab > op_.window().b) continue;
            out.segment(row_of_label(lab), m) = u_pow_.adjoint() * phi.segment(static_cast<Eigen::Index>(k) * m, m);
        }
        out.segment(es, d) = phi.tail(d);
        return out;
    }

    JointOperator op_;
    CMatrix u_, w_;
    CVector star_;
    int l_max_;
    double tol_;
    CMatrix g_; ///< co-moving Γ̃_t
    Eigen::Matrix2cd bmat_;
    CVector v_t_;    ///< U^{−t} v
    CMatrix u_pow_;  ///< U^t
    int t_ = 0;
    double leakage_ = 0.0;
};

/// One-particle form of the flux observable Φ_i restricted to
/// span{δ_0⊗C^m} ⊕ C^d (first m coordinates: site 0, then the sample).
/// Built from its six terms with u = δ_0⊗v, u_i = δ_0⊗π_i v, s = ψ*.
inline CMatrix flux_operator_local(const Environment& env, const Walk& walk, const CouplingSpec& coupling, int i) {
    const int m = env.m;
    const auto d = walk.dim();
    const double c = std::cos(coupling.alpha), sg = std::sin(coupling.alpha);
    const double w = env.weights(coupling.v)[i];
    CVector u = CVector::Zero(m + d), ui = CVector::Zero(m + d), s = CVector::Zero(m + d);
    u.head(m) = coupling.v;
    ui.head(m) = env.projector(i) * coupling.v;
    s.tail(d) = walk.star;
    auto ket_bra = [](const CVector& a, const CVector& b) -> CMatrix { return a * b.adjoint(); };

    CMatrix op = (c - 1.0) * (c - 1.0) * w * ket_bra(u, u);
    op += (c - 1.0) * (ket_bra(ui, u) + ket_bra(u, ui));
    op += I * sg * (c - 1.0) * w * (ket_bra(s, u) - ket_bra(u, s));
    op += I * sg * (ket_bra(s, ui) - ket_bra(ui, s));
    op += sg * sg * w * ket_bra(s, s);
    return op;
}

/// tr(Γ_t Φ_i) on the current covariance.
inline double flux_finite_time(const CovarianceState& st, const Environment& env, const Walk& walk,
                               const CouplingSpec& coupling, int i) {
    if (i < 0 || i >= env.m) throw ValidationError("flux_finite_time: subreservoir index out of range");
    const CMatrix op = flux_operator_local(env, walk, coupling, i);
    return (st.local_block({0}) * op).trace().real();
}

/// An environment vector Σ_ℓ δ_ℓ ⊗ sites[ℓ − first_site].
struct EnvVector {
    int first_site = 0;
    std::vector<CVector> sites;
};


struct FiniteTimeValue {
    cplx value;
    double error_scale = 0.0; ///< t‖M^t‖
};

/// ⟨ψ₂, Γ_t ψ₁⟩ for sample vectors from the explicit sums
///   ⟨M*^tψ₂, Ξ M*^tψ₁⟩ + sin²α Σ_{s,s'<t} conj a_{s'}(ψ₂) a_s(ψ₁) κ̃(s − s'),
/// a_s(ψ) = ⟨M^s W ψ*, ψ⟩.
inline FiniteTimeValue finite_time_aa(const Environment& env, const Walk& walk, const CouplingSpec& coupling,
                                      const Contraction& contraction, const CMatrix& xi, const CVector& psi1,
                                      const CVector& psi2, int t) {
    contraction.require_contracting();
    if (t < 0) throw ValidationError("finite_time_aa: t must be >= 0");
    const auto w = env.weights(coupling.v);
    const int lm = env.l_max();
    const double s2 = std::pow(std::sin(coupling.alpha), 2);
    std::vector<cplx> a1(t), a2(t);
    CVector g = walk.w * walk.star;
    for (int s = 0; s < t; ++s) {
        a1[s] = g.dot(psi1);
        a2[s] = g.dot(psi2);
        g = contraction.m * g;
    }
    cplx acc{0.0, 0.0};
    for (int s = 0; s < t; ++s)
        for (int sp = std::max(0, s - lm); sp <= std::min(t - 1, s + lm); ++sp)
            acc += std::conj(a2[sp]) * a1[s] * detail::kappa_ext(env, w, s - sp);

    CMatrix mt = CMatrix::Identity(walk.dim(), walk.dim());
    for (int s = 0; s < t; ++s) mt = mt * contraction.m.adjoint();
    FiniteTimeValue out;
    out.value = (mt * psi2).dot(xi * (mt * psi1)) + s2 * acc;
    out.error_scale = t * operator_norm(mt);
    return out;
}

/// ⟨φ₂, Γ_t ψ₁⟩ with φ₂ ∈ h_E^+ and ψ₁ in the sample:
///   i sin α Σ_{s<t} a_s(ψ₁) ⟨φ₂, Σ δ_{−(s+1)}⊗U^{s+1}v⟩.
inline FiniteTimeValue finite_time_ba(const Environment& env, const Walk& walk, const CouplingSpec& coupling,
                                      const Contraction& contraction, const EnvVector& phi2, const CVector& psi1,
                                      int t) {
    contraction.require_contracting();
    if (phi2.first_site < 0) throw ValidationError("finite_time_ba: environment vector must lie in h_E^+ (sites >= 0)");
    const int lm = env.l_max();
    const double sg = std::sin(coupling.alpha);
    cplx acc{0.0, 0.0};
    CVector g = walk.w * walk.star;
    CVector uv = coupling.v;
    for (int s = 0; s < t; ++s) {
        uv = env.u * uv;
        const int k = -(s + 1);
        if (phi2.first_site - k > lm) break; // nothing in range any more
        const cplx as = g.dot(psi1);
        for (std::size_t j = 0; j < phi2.sites.size(); ++j) {
            const int site = phi2.first_site + static_cast<int>(j);
            acc += as * phi2.sites[j].dot(detail::symbol_block(env, site - k) * uv);
        }
        g = contraction.m * g;
    }
    CMatrix mt = CMatrix::Identity(walk.dim(), walk.dim());
    for (int s = 0; s < t; ++s) mt = mt * contraction.m;
    return {I * sg * acc, t * operator_norm(mt)};
}

/// ⟨φ₂, Γ_t φ₁⟩ for φ₁, φ₂ ∈ h_E^+: equals ⟨φ₂, Σ φ₁⟩ at every t.
inline FiniteTimeValue finite_time_bb(const Environment& env, const EnvVector& phi1, const EnvVector& phi2) {
    if (phi1.first_site < 0 || phi2.first_site < 0)
        throw ValidationError("finite_time_bb: environment vectors must lie in h_E^+ (sites >= 0)");
    cplx acc{0.0, 0.0};
    for (std::size_t j1 = 0; j1 < phi1.sites.size(); ++j1)
        for (std::size_t j2 = 0; j2 < phi2.sites.size(); ++j2) {
            const int l = (phi2.first_site + static_cast<int>(j2)) - (phi1.first_site + static_cast<int>(j1));
            acc += phi2.sites[j2].dot(detail::symbol_block(env, l) * phi1.sites[j1]);
        }
    return {acc, 0.0};
}

/// Embeds an environment vector into the joint space of a covariance state.
inline CVector embed(const JointOperator& op, const EnvVector& phi) {
    CVector out = CVector::Zero(op.dim());
    for (std::size_t j = 0; j < phi.sites.size(); ++j) {
        const int site = phi.first_site + static_cast<int>(j);
        if (site < op.window().a || site > op.window().b) throw ValidationError("embed: site outside window");
        out.segment(op.site_offset(site), op.m()) = phi.sites[j];
    }
    return out;
}

inline CVector embed_sample(const JointOperator& op, const CVector& psi) {
    CVector out = CVector::Zero(op.dim());
    out.tail(op.sample_dim()) = psi;
    return out;
}

/// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct ConvergenceTrace {
    std::vector<int> t;
    std::vector<double> error; ///< ‖Γ_t^{sample} − Δ‖
};

inline ConvergenceTrace convergence_trace(CovarianceState& st, const CMatrix& delta, int steps) {
    ConvergenceTrace tr;
    for (int k = 0; k < steps; ++k) {
        st.step();
        tr.t.push_back(st.time());
        tr.error.push_back(operator_norm(st.sample_block() - delta));
    }
    return tr;
}

} // namespace fermiwalk
