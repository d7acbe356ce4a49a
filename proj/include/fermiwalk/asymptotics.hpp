#pragma once

// Closed-form long-time quantities of the coupled system.
//
// Two-point convention: ω(a*(f) a(g)) = ⟨g, Δ f⟩, so Δ is the one-particle
// density of the limit state on the sample.

#include "fermiwalk/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace fermiwalk {

struct AsymptoticState {
    CMatrix delta;
    RVector eigenvalues; ///< ascending
};

inline AsymptoticState make_state(CMatrix delta) {
    AsymptoticState s;
    s.delta = real_part(delta);
    s.eigenvalues = hermitian_eigenvalues(s.delta);
    return s;
}

/// Δ = Σ_i ‖π_i v‖² · 2 Re F_i(M*).
inline AsymptoticState asymptotic_symbol(const Environment& env, const Walk& walk, const CouplingSpec& coupling,
                                         const Contraction& contraction) {
    validate_coupling(coupling, env.m);
    require_nondegenerate_alpha(coupling.alpha);
    contraction.require_contracting();
    const auto w = env.weights(coupling.v);
    const CMatrix mstar = contraction.m.adjoint();
    CMatrix delta = CMatrix::Zero(walk.dim(), walk.dim());
    for (int i = 0; i < env.m; ++i) {
        if (w[i] == 0.0) continue;
        delta += w[i] * 2.0 * real_part(eval_series(env.f[i], mstar));
    }
    return make_state(std::move(delta));
}

inline AsymptoticState asymptotic_symbol(const Environment& env, const Walk& walk, const CouplingSpec& coupling) {
    return asymptotic_symbol(env, walk, coupling, make_contraction(walk.w, walk.star, coupling.alpha));
}

/// The α → 0 limit Σ_i ‖π_i v‖² 2 Re F_i(W*).
inline AsymptoticState weak_coupling_symbol(const Environment& env, const Walk& walk, const CVector& v) {
    const auto w = env.weights(v);
    const CMatrix wstar = walk.w.adjoint();
    CMatrix delta = CMatrix::Zero(walk.dim(), walk.dim());
    for (int i = 0; i < env.m; ++i) delta += w[i] * 2.0 * real_part(eval_series(env.f[i], wstar));
    return make_state(std::move(delta));
}

struct PoissonBinomial {
    std::vector<double> lambda;
    std::vector<double> mass; ///< mass[p] = Prob(N = p), p = 0..d

    double mean() const {
        double s = 0;
        for (std::size_t p = 0; p < mass.size(); ++p) s += p * mass[p];
        return s;
    }
    double variance() const {
        const double mu = mean();
        double s = 0;
        for (std::size_t p = 0; p < mass.size(); ++p) s += (p - mu) * (p - mu) * mass[p];
        return s;
    }
};

/// Iterated convolution of Bernoulli(λ_k) factors; O(d²), all terms positive.
inline PoissonBinomial poisson_binomial(const std::vector<double>& lambda) {
    PoissonBinomial pb;
    pb.lambda.reserve(lambda.size());
    for (double l : lambda) pb.lambda.push_back(std::clamp(l, 0.0, 1.0));
    pb.mass.assign(pb.lambda.size() + 1, 0.0);
    pb.mass[0] = 1.0;
    for (std::size_t k = 0; k < pb.lambda.size(); ++k) {
        const double l = pb.lambda[k];
        for (std::size_t p = k + 1; p >= 1; --p) pb.mass[p] = pb.mass[p] * (1.0 - l) + pb.mass[p - 1] * l;
        pb.mass[0] *= (1.0 - l);
    }
    return pb;
}

inline PoissonBinomial particle_number_distribution(const AsymptoticState& state) {
    return poisson_binomial(std::vector<double>(state.eigenvalues.data(),
                                                state.eigenvalues.data() + state.eigenvalues.size()));
}

inline void require_cycle(const Walk& walk, const char* what) {
    if (walk.kind != WalkKind::cycle) throw ValidationError(std::string(what) + " needs a cycle walk");
}

/// p(ν) = ⟨e_{ν,+}, Δ e_{ν,+}⟩ + ⟨e_{ν,−}, Δ e_{ν,−}⟩.
inline RVector node_profile(const CMatrix& delta, const Walk& walk) {
    require_cycle(walk, "node_profile");
    RVector p(walk.n);
    for (int nu = 0; nu < walk.n; ++nu) p(nu) = delta(2 * nu, 2 * nu).real() + delta(2 * nu + 1, 2 * nu + 1).real();
    return p;
}

inline RVector node_profile(const AsymptoticState& state, const Walk& walk) { return node_profile(state.delta, walk); }

/// C(ν, υ) = −Σ_{τ,τ'} |⟨e_{ν,τ}, Δ e_{υ,τ'}⟩|² for ν ≠ υ; the diagonal is left at 0.
inline RMatrix node_correlations(const CMatrix& delta, const Walk& walk) {
    require_cycle(walk, "node_correlations");
    RMatrix c = RMatrix::Zero(walk.n, walk.n);
    for (int a = 0; a < walk.n; ++a)
        for (int b = 0; b < walk.n; ++b) {
            if (a == b) continue;
            c(a, b) = -delta.block(2 * a, 2 * b, 2, 2).cwiseAbs2().sum();
        }
    return c;
}

inline RMatrix node_correlations(const AsymptoticState& state, const Walk& walk) {
    return node_correlations(state.delta, walk);
}

/// Closed-form profile for rotation coins and a symbol with c(ℓ) = 0 for
/// ℓ ≥ 3 (odd coefficients drop out):
/// p(ν) = 4F(0) − Re F''(0)(s_{ν−1}s_ν + s_ν s_{ν+1}), s_ν = sin θ_ν,
/// where the bond (0, 1) at the coupled node carries an extra cos α.
inline RVector rotation_example_profile(const std::vector<double>& theta, const SymbolFunction& f, double alpha) {
    const int n = static_cast<int>(theta.size());
    if (n < 3) throw ValidationError("rotation_example_profile: need n >= 3");
    if (f.l_max() > 2) throw ValidationError("rotation_example_profile: symbol must terminate at l = 2");
    const double four_f0 = 2.0 * f.c[0].real();
    const double re_f2 = 2.0 * f.coefficient(2).real(); // Re F''(0)
    auto s = [&](int k) { return std::sin(theta[((k % n) + n) % n]); };
    auto bond = [&](int k) { // pair (k, k+1)
        const double b = s(k) * s(k + 1);
        return (((k % n) + n) % n) == 0 ? std::cos(alpha) * b : b;
    };
    RVector p(n);
    for (int nu = 0; nu < n; ++nu) p(nu) = four_f0 - re_f2 * (bond(nu - 1) + bond(nu));
    return p;
}

struct FluxResult {
    std::vector<double> phi; ///< limiting flux into each subreservoir
};

/// g(t') = ⟨ψ*, M^{t'−1} W ψ*⟩ for t' = 1..L.
inline std::vector<cplx> return_amplitudes(const Walk& walk, const Contraction& contraction, int l) {
    std::vector<cplx> g(l + 1, cplx{0.0, 0.0});
    CVector x = walk.w * walk.star;
    for (int t = 1; t <= l; ++t) {
        g[t] = walk.star.dot(x);
        x = contraction.m * x;
    }
    return g;
}

/// Limiting fluxes φ_i. The Σ-brackets reduce to w_i and the coefficients:
/// ⟨δ_0⊗π_i v, Σ δ_0⊗π_i v⟩ = w_i c_i(0) and
/// ⟨S^{t'}δ_0⊗U^{t'}π_i v, Σ δ_0⊗π_i v⟩ = w_i conj c_i(t').
/// Only t' ≤ L_max contribute, so the series is exact.
inline FluxResult flux_expectations(const Environment& env, const Walk& walk, const CouplingSpec& coupling,
                                    const Contraction& contraction) {
    validate_coupling(coupling, env.m);
    require_nondegenerate_alpha(coupling.alpha);
    contraction.require_contracting();
    const auto w = env.weights(coupling.v);
    const int lm = env.l_max();
    const double c = std::cos(coupling.alpha), s2 = std::pow(std::sin(coupling.alpha), 2);
    const auto g = return_amplitudes(walk, contraction, lm);

    FluxResult out;
    out.phi.resize(env.m);
    for (int i = 0; i < env.m; ++i) {
        const double first = (2.0 - 2.0 * c) * w[i] * (env.kappa(w, 0).real() - env.f[i].c[0].real());
        cplx tail{0.0, 0.0};
        for (int t = 1; t <= lm; ++t)
            tail += g[t] * w[i] * (std::conj(env.kappa(w, t)) - std::conj(env.f[i].coefficient(t)));
        out.phi[i] = first + 2.0 * (s2 * tail).real();
    }
    return out;
}

/// r_i = w_i(1 − w_i) · 2 Re( Σ_{j≠i} w_j/(1 − w_i) F_j(1) − F_i(1) ).
/// Equals lim φ_i/α² when the F_j share their ℓ ≥ 1 coefficients (in
/// particular for constant F_j); see weak_coupling_flux_rate for the
/// general limit.
inline std::vector<double> small_alpha_flux_rate(const Environment& env, const std::vector<double>& w) {
    if (static_cast<int>(w.size()) != env.m) throw ValidationError("small_alpha_flux_rate: weight count mismatch");
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] < 1e-12 || w[i] > 1.0 - 1e-12)
            throw ValidationError("small_alpha_flux_rate: weight " + std::to_string(i) +
                                  " is 0 or 1, so v = pi_i v or pi_i v = 0");
    std::vector<double> r(env.m);
    for (int i = 0; i < env.m; ++i) {
        cplx acc{0.0, 0.0};
        for (int j = 0; j < env.m; ++j)
            if (j != i) acc += (w[j] / (1.0 - w[i])) * env.f[j](1.0);
        acc -= env.f[i](1.0);
        r[i] = w[i] * (1.0 - w[i]) * 2.0 * acc.real();
    }
    return r;
}

/// lim_{α→0} φ_i/α² from the closed form: the return amplitudes become
/// ⟨ψ*, W^{t'} ψ*⟩.
inline std::vector<double> weak_coupling_flux_rate(const Environment& env, const Walk& walk,
                                                   const std::vector<double>& w) {
    const int lm = env.l_max();
    std::vector<double> r(env.m);
    std::vector<cplx> g(lm + 1);
    CVector x = walk.star;
    for (int t = 1; t <= lm; ++t) {
        x = walk.w * x;
        g[t] = walk.star.dot(x);
    }
    cplx k0 = 0.0;
    for (int j = 0; j < env.m; ++j) k0 += w[j] * env.f[j].c[0];
    for (int i = 0; i < env.m; ++i) {
        double val = w[i] * (k0.real() - env.f[i].c[0].real());
        cplx tail{0.0, 0.0};
        for (int t = 1; t <= lm; ++t) {
            cplx kt = 0.0;
            for (int j = 0; j < env.m; ++j) kt += w[j] * env.f[j].coefficient(t);
            tail += g[t] * w[i] * (std::conj(kt) - std::conj(env.f[i].coefficient(t)));
        }
        r[i] = val + 2.0 * tail.real();
    }
    return r;
}

} // namespace fermiwalk
