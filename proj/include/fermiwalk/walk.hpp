#pragma once

// One-particle walk unitaries on the sample space C^n ⊗ C^r.
//
// Basis ordering is position-major: index = ν·r + k. For the cycle walk the
// spin basis is ordered (e_{-1}, e_{+1}), so δ_ν ⊗ e_{-1} has index 2ν and
// δ_ν ⊗ e_{+1} has index 2ν+1. Coin matrices are written in the same
// (e_{-1}, e_{+1}) ordering. W = W1·W2: the coin W2 acts first, then the
// conditional shift W1.

#include "fermiwalk/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace fermiwalk {

inline constexpr double kUnitaryTol = 1e-12;

/// 1/√2 [[1, 1], [-1, 1]] in the (e_{-1}, e_{+1}) ordering.
inline CMatrix hadamard_coin() {
    CMatrix c(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    c << s, s, -s, s;
    return c;
}

/// [[cos θ, −sin θ], [sin θ, cos θ]].
inline CMatrix rotation_coin(double theta) {
    CMatrix c(2, 2);
    c << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return c;
}

inline void validate_coin(const CMatrix& coin, std::size_t index, Eigen::Index dim) {
    if (coin.rows() != dim || coin.cols() != dim)
        throw ValidationError("coin " + std::to_string(index) + " has shape " +
                              std::to_string(coin.rows()) + "x" + std::to_string(coin.cols()) +
                              ", expected " + std::to_string(dim) + "x" + std::to_string(dim));
    const double defect = operator_norm(coin.adjoint() * coin - CMatrix::Identity(dim, dim));
    if (!(defect <= kUnitaryTol))
        throw ValidationError("coin " + std::to_string(index) + " is not unitary (||C*C - 1|| = " +
                              std::to_string(defect) + ")");
}

/// Index of δ_ν ⊗ e_τ in the cycle-walk basis, τ ∈ {−1, +1}.
inline Eigen::Index cycle_index(int nu, int tau) { return 2 * nu + (tau > 0 ? 1 : 0); }

/// Coined walk on the n-cycle: W = W1 W2 with
/// W1 = Σ δ_{ν+τ} ⊗ e_τ ⟨δ_ν ⊗ e_τ, ·⟩ and W2 = Σ δ_ν⟨δ_ν, ·⟩ ⊗ C_ν.
inline CMatrix build_cycle_walk(const std::vector<CMatrix>& coins) {
    const int n = static_cast<int>(coins.size());
    if (n < 2) throw ValidationError("cycle walk needs n >= 2, got " + std::to_string(n));
    for (std::size_t k = 0; k < coins.size(); ++k) validate_coin(coins[k], k, 2);

    const Eigen::Index d = 2 * n;
    CMatrix w = CMatrix::Zero(d, d);
    for (int nu = 0; nu < n; ++nu) {
        for (int in = 0; in < 2; ++in) {
            for (int out = 0; out < 2; ++out) {
                const int tau = out == 0 ? -1 : 1;
                const int target = ((nu + tau) % n + n) % n;
                w(2 * target + out, 2 * nu + in) += coins[nu](out, in);
            }
        }
    }
    return w;
}

/// Checks that every colour class is a fixed-point-free involution.
inline void validate_coloring(int n, int r, const std::vector<std::vector<int>>& coloring) {
    if (n % 2 != 0)
        throw ValidationError("regular graph walk: n = " + std::to_string(n) +
                              " is odd; a proper r-edge-colouring forces n to be even");
    if (static_cast<int>(coloring.size()) != n)
        throw ValidationError("regular graph walk: colouring has " + std::to_string(coloring.size()) +
                              " rows, expected n = " + std::to_string(n));
    for (int nu = 0; nu < n; ++nu) {
        if (static_cast<int>(coloring[nu].size()) != r)
            throw ValidationError("regular graph walk: vertex " + std::to_string(nu) + " has " +
                                  std::to_string(coloring[nu].size()) + " colours, expected r = " +
                                  std::to_string(r));
        for (int a = 0; a < r; ++a) {
            const int nb = coloring[nu][a];
            if (nb < 0 || nb >= n)
                throw ValidationError("regular graph walk: neighbour out of range at (" +
                                      std::to_string(nu) + ", " + std::to_string(a) + ")");
            if (nb == nu)
                throw ValidationError("regular graph walk: colour " + std::to_string(a) +
                                      " has a fixed point at vertex " + std::to_string(nu));
            if (coloring[nb][a] != nu)
                throw ValidationError("regular graph walk: colour " + std::to_string(a) +
                                      " is not an involution at vertex " + std::to_string(nu));
        }
    }
}

/// Walk on a class-1 r-regular graph; coloring[ν][a] = ν'(ν, a).
inline CMatrix build_regular_graph_walk(int n, int r, const std::vector<std::vector<int>>& coloring,
                                        const std::vector<CMatrix>& coins) {
    if (r < 1) throw ValidationError("regular graph walk needs r >= 1");
    validate_coloring(n, r, coloring);
    if (static_cast<int>(coins.size()) != n)
        throw ValidationError("regular graph walk: expected " + std::to_string(n) + " coins, got " +
                              std::to_string(coins.size()));
    for (std::size_t k = 0; k < coins.size(); ++k) validate_coin(coins[k], k, r);

    const Eigen::Index d = static_cast<Eigen::Index>(n) * r;
    CMatrix w1 = CMatrix::Zero(d, d);
    CMatrix w2 = CMatrix::Zero(d, d);
    for (int nu = 0; nu < n; ++nu) {
        for (int a = 0; a < r; ++a) w1(coloring[nu][a] * r + a, nu * r + a) = 1.0;
        w2.block(nu * r, nu * r, r, r) = coins[nu];
    }
    return w1 * w2;
}

struct Cyclicity {
    bool cyclic = false;
    int krylov_rank = 0;
};

/// Rank of the Krylov matrix [ψ, Wψ, …, W^{d−1}ψ] by singular-value
/// thresholding at tol · σ_max; ψ is cyclic iff the rank is d.
inline Cyclicity is_cyclic(const CMatrix& w, const CVector& psi, double tol = 1e-10) {
    const Eigen::Index d = w.rows();
    if (w.cols() != d || psi.size() != d) throw ValidationError("is_cyclic: dimension mismatch");
    if (std::abs(psi.norm() - 1.0) > 1e-10) throw ValidationError("is_cyclic: psi must be a unit vector");
    if (!(tol > 0)) throw ValidationError("is_cyclic: tolerance must be positive");

    CMatrix krylov(d, d);
    CVector col = psi;
    for (Eigen::Index k = 0; k < d; ++k) {
        krylov.col(k) = col;
        col = w * col;
    }
    Eigen::JacobiSVD<CMatrix> svd(krylov);
    const RVector& s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) > tol * s(0)) ++rank;
    return {rank == d, rank};
}

enum class WalkKind { cycle, regular_graph, raw };

/// Construction recipe for a sample walk, as read from a config.
struct WalkSpec {
    WalkKind kind = WalkKind::cycle;
    int n = 0;
    int r = 2;
    std::vector<CMatrix> coins;
    std::vector<std::vector<int>> coloring;
    CMatrix raw;
    /// Explicit ψ*; empty means basis vector `star_index`.
    CVector star;
    Eigen::Index star_index = 0;
};

/// A validated one-particle dynamics W together with the coupling vector ψ*.
struct Walk {
    WalkKind kind = WalkKind::raw;
    int n = 0;  ///< vertices (0 for raw)
    int r = 0;  ///< internal dimension (0 for raw)
    CMatrix w;
    CVector star;

    Eigen::Index dim() const { return w.rows(); }
};

inline Walk build_walk(const WalkSpec& spec) {
    Walk out;
    out.kind = spec.kind;
    switch (spec.kind) {
    case WalkKind::cycle:
        if (static_cast<int>(spec.coins.size()) != spec.n)
            throw ValidationError("cycle walk: expected " + std::to_string(spec.n) + " coins, got " +
                                  std::to_string(spec.coins.size()));
        out.w = build_cycle_walk(spec.coins);
        out.n = spec.n;
        out.r = 2;
        break;
    case WalkKind::regular_graph:
        out.w = build_regular_graph_walk(spec.n, spec.r, spec.coloring, spec.coins);
        out.n = spec.n;
        out.r = spec.r;
        break;
    case WalkKind::raw:
        if (spec.raw.rows() == 0 || spec.raw.rows() != spec.raw.cols())
            throw ValidationError("raw walk: W must be a non-empty square matrix");
        if (const double u = unitarity_defect(spec.raw); !(u <= kUnitaryTol))
            throw ValidationError("raw walk: W is not unitary (defect " + std::to_string(u) + ")");
        out.w = spec.raw;
        break;
    }

    const Eigen::Index d = out.w.rows();
    if (spec.star.size() > 0) {
        if (spec.star.size() != d)
            throw ValidationError("star vector has dimension " + std::to_string(spec.star.size()) +
                                  ", expected " + std::to_string(d));
        if (std::abs(spec.star.norm() - 1.0) > 1e-12) throw ValidationError("star vector must have unit norm");
        out.star = spec.star;
    } else {
        if (spec.star_index < 0 || spec.star_index >= d)
            throw ValidationError("star index " + std::to_string(spec.star_index) + " out of range");
        out.star = basis_vector(d, spec.star_index);
    }
    return out;
}

} // namespace fermiwalk
