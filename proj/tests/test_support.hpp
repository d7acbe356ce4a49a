#pragma once

#include "fermiwalk/fermiwalk.hpp"

#include <random>
#include <vector>

namespace fwtest {

using namespace fermiwalk;

// Haar-ish unitary: QR of a complex Gaussian matrix
inline CMatrix random_unitary(int k, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    CMatrix a(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            const double re = nd(rng);
            a(i, j) = cplx(re, nd(rng));
        }
    Eigen::HouseholderQR<CMatrix> qr(a);
    return qr.householderQ();
}

inline CMatrix random_density(int k, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const CMatrix q = random_unitary(k, rng);
    CVector lam(k);
    for (int i = 0; i < k; ++i) lam(i) = ud(rng);
    return q * lam.asDiagonal() * q.adjoint();
}

inline CVector random_unit(int k, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    CVector v(k);
    for (int i = 0; i < k; ++i) {
        const double re = nd(rng);
        v(i) = cplx(re, nd(rng));
    }
    return v.normalized();
}

inline Walk cycle_walk(std::vector<CMatrix> coins) {
    WalkSpec s;
    s.kind = WalkKind::cycle;
    s.n = static_cast<int>(coins.size());
    s.coins = std::move(coins);
    return build_walk(s);
}

inline Walk random_cycle_walk(int n, std::mt19937_64& rng) {
    std::vector<CMatrix> coins;
    for (int k = 0; k < n; ++k) coins.push_back(random_unitary(2, rng));
    return cycle_walk(std::move(coins));
}

inline Walk hadamard_walk(int n) { return cycle_walk(std::vector<CMatrix>(n, hadamard_coin())); }

/// Admissible F: 2Re F ∈ [c0 − 2Σ|c_ℓ|, c0 + 2Σ|c_ℓ|] ⊂ [0, 1].
inline SymbolFunction random_symbol(int l_max, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    SymbolFunction f;
    const double c0 = 0.2 + 0.6 * ud(rng);
    f.c.push_back(c0);
    const double budget = 0.45 * std::min(c0, 1.0 - c0);
    std::vector<double> share(l_max);
    double tot = 0;
    for (double& s : share) tot += (s = ud(rng) + 0.1);
    for (int l = 1; l <= l_max; ++l) f.c.push_back(std::polar(budget * share[l - 1] / tot, 2 * std::numbers::pi * ud(rng)));
    return f;
}

inline Environment random_environment(int m, int l_max, std::mt19937_64& rng) {
    std::vector<SymbolFunction> f;
    for (int i = 0; i < m; ++i) f.push_back(random_symbol(l_max, rng));
    return make_environment(m == 1 ? CMatrix::Identity(1, 1) : random_unitary(m, rng), std::move(f));
}

inline CouplingSpec coupling(double alpha, const Environment& env, std::mt19937_64& rng) {
    CouplingSpec c{alpha, CVector::Ones(1)};
    if (env.m > 1) c.v = random_unit(env.m, rng);
    return c;
}

/// F(ζ) = 1/4 + ζ²/8, i.e. c(0) = 1/2, c(2) = 1/8.
inline SymbolFunction quarter_symbol() { return SymbolFunction{{0.5, 0.0, 0.125}}; }

/// Cyclic n = 4 instance with spr ≤ 0.961 at α ∈ {π/4, 1}; the homogeneous
/// Hadamard walk is not cyclic for n ≥ 3.
inline Walk fast_walk_n4() {
    std::mt19937_64 rng(2070);
    return random_cycle_walk(4, rng);
}

} // namespace fwtest
