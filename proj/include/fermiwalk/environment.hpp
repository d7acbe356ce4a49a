#pragma once

// Translation-invariant reservoir on ℓ²(Z) ⊗ C^m.
//
// The state is described by a symbol Σ commuting with S⊗U and with every
// 1⊗π_i. On the i-th eigenvector sector it is encoded by the coefficients
// c_i(ℓ) = ⟨δ_0⊗x_i, Σ (S⊗U)^ℓ (δ_0⊗x_i)⟩, ℓ = 0..L_max, and the function
// F_i(ζ) = c_i(0)/2 + Σ_{ℓ≥1} c_i(ℓ) ζ^ℓ.

#include "fermiwalk/types.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

namespace fermiwalk {

/// F(ζ) = c(0)/2 + Σ_{ℓ=1}^{L_max} c(ℓ) ζ^ℓ.
struct SymbolFunction {
    std::vector<cplx> c;

    int l_max() const { return static_cast<int>(c.size()) - 1; }

    cplx coefficient(int l) const {
        return (l >= 0 && l < static_cast<int>(c.size())) ? c[l] : cplx{0.0, 0.0};
    }

    cplx operator()(cplx zeta) const {
        // Horner on the ℓ ≥ 1 tail
        cplx acc{0.0, 0.0};
        for (int l = l_max(); l >= 1; --l) acc = (acc + c[l]) * zeta;
        return acc + 0.5 * c[0];
    }

    static SymbolFunction constant(double density) { return SymbolFunction{{cplx{density, 0.0}}}; }
};

inline void validate_coefficients(const SymbolFunction& f, std::size_t index) {
    if (f.c.empty())
        throw ValidationError("symbol function " + std::to_string(index) + " has no coefficients");
    for (const cplx& z : f.c)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw ValidationError("symbol function " + std::to_string(index) + " has a non-finite coefficient");
    const cplx c0 = f.c[0];
    if (std::abs(c0.imag()) > 1e-12)
        throw ValidationError("symbol function " + std::to_string(index) + ": c(0) must be real");
    if (c0.real() < -1e-12 || c0.real() > 1.0 + 1e-12)
        throw ValidationError("symbol function " + std::to_string(index) + ": c(0) = " +
                              std::to_string(c0.real()) + " outside [0, 1]");
}

struct Environment {
    int m = 0;
    CMatrix u;                 ///< m×m unitary
    std::vector<double> gamma; ///< eigenphases in [0, 2π), ascending
    CMatrix x;                 ///< columns are the eigenvectors x_i
    std::vector<SymbolFunction> f;
    double gap_tolerance = 1e-8;

    int l_max() const {
        int l = 0;
        for (const auto& fi : f) l = std::max(l, fi.l_max());
        return l;
    }

    CMatrix projector(int i) const { return x.col(i) * x.col(i).adjoint(); }

    /// w_i = ‖π_i v‖².
    std::vector<double> weights(const CVector& v) const {
        std::vector<double> w(m);
        for (int i = 0; i < m; ++i) w[i] = std::norm(x.col(i).dot(v));
        return w;
    }

    /// κ(ℓ) = Σ_i w_i c_i(ℓ) = ⟨δ_0⊗v, Σ (S⊗U)^ℓ (δ_0⊗v)⟩.
    cplx kappa(const std::vector<double>& w, int l) const {
        cplx s{0.0, 0.0};
        for (int i = 0; i < m; ++i) s += w[i] * f[i].coefficient(l);
        return s;
    }
};

namespace detail {

inline void check_environment_invariants(const Environment& env) {
    const int m = env.m;
    if (static_cast<int>(env.f.size()) != m)
        throw ValidationError("environment: expected " + std::to_string(m) + " symbol functions, got " +
                              std::to_string(env.f.size()));
    for (std::size_t i = 0; i < env.f.size(); ++i) validate_coefficients(env.f[i], i);
    if (!(env.gap_tolerance > 0)) throw ValidationError("environment: gap_tolerance must be positive");

    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            double gap = std::abs(env.gamma[i] - env.gamma[j]);
            gap = std::min(gap, 2 * std::numbers::pi - gap);
            if (gap <= env.gap_tolerance)
                throw ValidationError("environment: U has a degenerate eigenvalue (phases " +
                                      std::to_string(env.gamma[i]) + " and " + std::to_string(env.gamma[j]) +
                                      ")");
        }

    CMatrix sum = CMatrix::Zero(m, m);
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        const CMatrix pi = env.projector(i);
        sum += pi;
        for (int j = 0; j < m; ++j) {
            CMatrix prod = pi * env.projector(j);
            if (i == j) prod -= pi;
            worst = std::max(worst, operator_norm(prod));
        }
    }
    worst = std::max(worst, operator_norm(sum - CMatrix::Identity(m, m)));
    if (worst > 1e-12)
        throw ValidationError("environment: eigenprojectors fail resolution of identity (defect " +
                              std::to_string(worst) + ")");
}

inline void sort_by_phase(Environment& env) {
    std::vector<int> order(env.m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return env.gamma[a] < env.gamma[b]; });
    std::vector<double> g(env.m);
    CMatrix x(env.m, env.m);
    for (int k = 0; k < env.m; ++k) {
        g[k] = env.gamma[order[k]];
        x.col(k) = env.x.col(order[k]);
    }
    env.gamma = std::move(g);
    env.x = std::move(x);
}

} // namespace detail

/// Builds the environment from an explicit unitary U. The functions are
/// matched to eigenvectors in ascending-phase order.
inline Environment make_environment(const CMatrix& u, std::vector<SymbolFunction> f, double gap_tolerance = 1e-8) {
    const auto m = u.rows();
    if (m < 1 || u.cols() != m) throw ValidationError("environment: U must be a non-empty square matrix");
    if (const double d = unitarity_defect(u); d > 1e-12)
        throw ValidationError("environment: U is not unitary (defect " + std::to_string(d) + ")");

    Environment env;
    env.m = static_cast<int>(m);
    env.u = u;
    env.f = std::move(f);
    env.gap_tolerance = gap_tolerance;

    Eigen::ComplexEigenSolver<CMatrix> es(u);
    if (es.info() != Eigen::Success) throw DomainError("environment: eigensolver failed on U");
    env.gamma.resize(m);
    env.x = es.eigenvectors();
    for (Eigen::Index i = 0; i < m; ++i) {
        env.gamma[i] = phase_0_2pi(es.eigenvalues()(i));
        env.x.col(i).normalize();
    }
    detail::sort_by_phase(env);
    // simple spectrum of a normal matrix: orthogonal up to rounding, clean it up
    Eigen::HouseholderQR<CMatrix> qr(env.x);
    CMatrix q = qr.householderQ();
    for (Eigen::Index i = 0; i < m; ++i) {
        const cplx ph = q.col(i).dot(env.x.col(i));
        q.col(i) *= ph / std::abs(ph);
    }
    env.x = q;
    detail::check_environment_invariants(env);
    return env;
}

/// Builds the environment from eigenphases and an eigenvector matrix.
inline Environment make_environment(const std::vector<double>& phases, const CMatrix& eigenvectors,
                                    std::vector<SymbolFunction> f, double gap_tolerance = 1e-8) {
    const auto m = static_cast<Eigen::Index>(phases.size());
    if (m < 1 || eigenvectors.rows() != m || eigenvectors.cols() != m)
        throw ValidationError("environment: eigenvector matrix must be m×m with m = number of phases");
    if (const double d = unitarity_defect(eigenvectors); d > 1e-12)
        throw ValidationError("environment: eigenvector matrix is not unitary (defect " + std::to_string(d) + ")");

    Environment env;
    env.m = static_cast<int>(m);
    env.f = std::move(f);
    env.gap_tolerance = gap_tolerance;
    env.x = eigenvectors;
    env.gamma.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) env.gamma[i] = phase_0_2pi(std::polar(1.0, phases[i]));
    detail::sort_by_phase(env);
    CVector diag(m);
    for (Eigen::Index i = 0; i < m; ++i) diag(i) = std::polar(1.0, env.gamma[i]);
    env.u = env.x * diag.asDiagonal() * env.x.adjoint();
    detail::check_environment_invariants(env);
    return env;
}

struct SymbolRange {
    double min = 0.0, max = 0.0;
    double phi_at_min = 0.0, phi_at_max = 0.0;
};

struct ValidationReport {
    bool pass = true;
    std::vector<SymbolRange> ranges; ///< one per symbol function
    int worst_index = -1;            ///< function with the largest violation, -1 if none
    double worst_phi = 0.0;
    double worst_value = 0.0;
    std::string message;
};

/// Samples g(φ) = 2 Re F(e^{iφ}) on a uniform grid; the symbol is admissible
/// iff 0 ≤ g ≤ 1 on the grid (1e−12 slack).
inline ValidationReport validate_symbol(const std::vector<SymbolFunction>& fs, int grid_size = 4096) {
    if (grid_size < 64) throw ValidationError("validate_symbol: grid_size must be >= 64");
    ValidationReport rep;
    double worst_violation = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        SymbolRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0, 0};
        for (int k = 0; k < grid_size; ++k) {
            const double phi = 2 * std::numbers::pi * k / grid_size;
            const double g = 2 * fs[i](std::polar(1.0, phi)).real();
            if (g < r.min) { r.min = g; r.phi_at_min = phi; }
            if (g > r.max) { r.max = g; r.phi_at_max = phi; }
        }
        rep.ranges.push_back(r);
        const double lo = -r.min, hi = r.max - 1.0;
        if (lo > 1e-12 && lo > worst_violation) {
            worst_violation = lo;
            rep.worst_index = static_cast<int>(i);
            rep.worst_phi = r.phi_at_min;
            rep.worst_value = r.min;
        }
        if (hi > 1e-12 && hi > worst_violation) {
            worst_violation = hi;
            rep.worst_index = static_cast<int>(i);
            rep.worst_phi = r.phi_at_max;
            rep.worst_value = r.max;
        }
    }
    if (rep.worst_index >= 0) {
        rep.pass = false;
        rep.message = "symbol function " + std::to_string(rep.worst_index) + ": 2 Re F(e^{i phi}) = " +
                      std::to_string(rep.worst_value) + " at phi = " + std::to_string(rep.worst_phi) +
                      (rep.worst_value < 0 ? " violates lower bound 0" : " violates upper bound 1");
    } else {
        rep.message = "ok";
    }
    return rep;
}

inline ValidationReport validate_symbol(const Environment& env, int grid_size = 4096) {
    return validate_symbol(env.f, grid_size);
}

/// F(B) by iterated multiplication. Requires ‖B‖ ≤ 1.
inline CMatrix eval_series(const SymbolFunction& f, const CMatrix& b) {
    const auto d = b.rows();
    if (b.cols() != d) throw ValidationError("eval_series: B must be square");
    if (const double nb = operator_norm(b); nb > 1.0 + 1e-10)
        throw DomainError("eval_series: ||B|| = " + std::to_string(nb) + " exceeds 1");
    CMatrix out = (0.5 * f.c[0]) * CMatrix::Identity(d, d);
    CMatrix power = CMatrix::Identity(d, d);
    for (int l = 1; l <= f.l_max(); ++l) {
        power = power * b;
        out += f.c[l] * power;
    }
    return out;
}

/// (A + A*)/2
inline CMatrix real_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

inline double spectral_radius(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::ComplexEigenSolver<CMatrix> es(a, false);
    if (es.info() != Eigen::Success) throw DomainError("spectral_radius: eigensolver failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// (1/2πi)∮_{|ζ|=r} F(ζ)(ζ − B)^{-1} dζ by the N-point trapezoid rule,
/// i.e. (1/N) Σ_k F(ζ_k) ζ_k (ζ_k − B)^{-1}. Aliasing error ~ (spr(B)/r)^N.
inline CMatrix eval_contour(const SymbolFunction& f, const CMatrix& b, double radius, int nodes) {
    const auto d = b.rows();
    if (b.cols() != d) throw ValidationError("eval_contour: B must be square");
    if (nodes < 32) throw ValidationError("eval_contour: nodes must be >= 32");
    if (!(radius > 0.0) || radius > 1.0) throw ValidationError("eval_contour: radius must lie in (0, 1]");
    if (const double s = spectral_radius(b); radius <= s)
        throw DomainError("eval_contour: radius " + std::to_string(radius) + " <= spr(B) = " + std::to_string(s) +
                          ", resolvent pole inside contour");
    CMatrix acc = CMatrix::Zero(d, d);
    const CMatrix id = CMatrix::Identity(d, d);
    for (int k = 0; k < nodes; ++k) {
        const cplx zeta = std::polar(radius, 2 * std::numbers::pi * (k + 0.5) / nodes);
        Eigen::PartialPivLU<CMatrix> lu(zeta * id - b);
        acc += (f(zeta) * zeta) * lu.inverse();
    }
    return acc / static_cast<double>(nodes);
}

/// ⟨δ_{k+ℓ}⊗x_i, Σ(δ_k⊗x_i)⟩. For ℓ ≥ 1 this is c_i(ℓ) e^{−iℓγ_i}, since
/// (S⊗U)^ℓ(δ_0⊗x_i) = e^{iℓγ_i} δ_{−ℓ}⊗x_i.
inline cplx symbol_entry(const Environment& env, int i, int l) {
    if (l == 0) return env.f[i].c[0].real();
    const int al = std::abs(l);
    const cplx val = env.f[i].coefficient(al) * std::polar(1.0, -al * env.gamma[i]);
    return l > 0 ? val : std::conj(val);
}

struct TruncatedSymbol {
    int a = 0, b = 0;
    CMatrix sigma;                   ///< index (k − a)·m + j
    bool truncation_warning = false; ///< window shorter than 2·L_max + 1
};

/// Restriction of Σ to the sites a..b.
inline TruncatedSymbol build_truncated_symbol(const Environment& env, int a, int b) {
    if (b < a) throw ValidationError("build_truncated_symbol: empty window");
    const int len = b - a + 1;
    const int m = env.m;
    const int lm = env.l_max();
    TruncatedSymbol out;
    out.a = a;
    out.b = b;
    out.truncation_warning = len < 2 * lm + 1;
    out.sigma = CMatrix::Zero(static_cast<Eigen::Index>(len) * m, static_cast<Eigen::Index>(len) * m);

    std::vector<CMatrix> blocks(2 * lm + 1, CMatrix::Zero(m, m)); // blocks[l + lm]
    for (int l = -lm; l <= lm; ++l)
        for (int i = 0; i < m; ++i) blocks[l + lm] += symbol_entry(env, i, l) * env.projector(i);

    for (int k = 0; k < len; ++k)
        for (int l = -lm; l <= lm; ++l) {
            const int row = k + l;
            if (row < 0 || row >= len) continue;
            out.sigma.block(static_cast<Eigen::Index>(row) * m, static_cast<Eigen::Index>(k) * m, m, m) =
                blocks[l + lm];
        }
    return out;
}

} // namespace fermiwalk
