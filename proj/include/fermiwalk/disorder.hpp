#pragma once

// Random coined walks on a ring of n sites.
//
// Coin at site ν, written in the (e_{−1}, e_{+1}) ordering used everywhere
// else:
//   C_ν(ω) = [[ t e^{−iω⁻_ν},  r e^{−iω⁻_ν} ],
//             [−r e^{−iω⁺_ν},  t e^{−iω⁺_ν} ]]
// For ω ≡ θ₀ the ring walk is e^{−iθ₀} times the clean walk, whose
// spectrum lies on the arcs Λ± = {x ± i√(1−x²) : |x| ≤ |t|}.

#include "fermiwalk/asymptotics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace fermiwalk {

enum class PhaseLaw { point, uniform };

struct PhaseDistribution {
    PhaseLaw kind = PhaseLaw::point;
    double theta0 = 0.0;
    double eta = 0.0; ///< half-width for the uniform law

    double lo() const { return kind == PhaseLaw::point ? theta0 : theta0 - eta; }
    double hi() const { return kind == PhaseLaw::point ? theta0 : theta0 + eta; }
};

struct DisorderModel {
    double t = 0.0, r = 0.0;
    PhaseDistribution mu;
    int n = 0;
};

inline void validate_disorder(const DisorderModel& m) {
    if (std::abs(m.t * m.t + m.r * m.r - 1.0) > 1e-12)
        throw ValidationError("disorder: t^2 + r^2 must equal 1");
    if (m.t * m.r == 0.0) throw ValidationError("disorder: t*r must be nonzero");
    if (m.n < 3) throw ValidationError("disorder: ring size n must be >= 3");
    if (m.mu.kind == PhaseLaw::uniform && !(m.mu.eta > 0.0))
        throw ValidationError("disorder: uniform phase law needs a positive half-width");
}

/// splitmix64 finaliser; used to derive per-sample seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ull));
}

struct DisorderSample {
    std::vector<double> omega_plus, omega_minus;
    Walk walk;
};

inline CMatrix disorder_coin(double t, double r, double wp, double wm) {
    const cplx em = std::polar(1.0, -wm), ep = std::polar(1.0, -wp);
    CMatrix c(2, 2);
    c << t * em, r * em, -r * ep, t * ep;
    return c;
}

inline Walk ring_walk(const DisorderModel& model, const std::vector<double>& wp, const std::vector<double>& wm) {
    std::vector<CMatrix> coins;
    coins.reserve(model.n);
    for (int nu = 0; nu < model.n; ++nu) coins.push_back(disorder_coin(model.t, model.r, wp[nu], wm[nu]));
    WalkSpec spec;
    spec.kind = WalkKind::cycle;
    spec.n = model.n;
    spec.coins = std::move(coins);
    spec.star_index = cycle_index(0, -1);
    return build_walk(spec);
}

inline DisorderSample sample_disordered_walk(const DisorderModel& model, std::uint64_t seed) {
    validate_disorder(model);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(model.mu.lo(), model.mu.hi());
    DisorderSample s;
    s.omega_plus.resize(model.n);
    s.omega_minus.resize(model.n);
    for (int nu = 0; nu < model.n; ++nu) {
        s.omega_plus[nu] = model.mu.kind == PhaseLaw::point ? model.mu.theta0 : u(rng);
        s.omega_minus[nu] = model.mu.kind == PhaseLaw::point ? model.mu.theta0 : u(rng);
    }
    s.walk = ring_walk(model, s.omega_plus, s.omega_minus);
    return s;
}

/// Spectrum of the clean ring walk with all phases θ₀, by Bloch
/// decomposition: eig(diag(e^{ik}, e^{−ik}) C) at k = 2πj/n.
inline std::vector<cplx> bloch_spectrum(double t, double r, double theta0, int n) {
    const CMatrix c = disorder_coin(t, r, theta0, theta0);
    std::vector<cplx> out;
    for (int j = 0; j < n; ++j) {
        const double k = 2 * std::numbers::pi * j / n;
        CMatrix wk(2, 2);
        wk.row(0) = std::polar(1.0, k) * c.row(0);  // e_{−1} hops to ν−1
        wk.row(1) = std::polar(1.0, -k) * c.row(1); // e_{+1} hops to ν+1
        Eigen::ComplexEigenSolver<CMatrix> es(wk, false);
        for (int q = 0; q < 2; ++q) out.push_back(es.eigenvalues()(q));
    }
    return out;
}

/// Distance (in |Re|) by which z misses ∪_{θ∈[lo,hi]} e^{−iθ}(Λ₊ ∪ Λ₋),
/// 0 if inside. z on the unit circle lies in e^{−iθ}Λ± iff |Re(e^{iθ}z)| ≤ |t|.
inline double band_excess(cplx z, double t, double lo, double hi) {
    const double phi = std::arg(z);
    // min over θ of |cos(φ + θ)|: zero if φ+θ crosses π/2 mod π
    const double a = phi + lo, b = phi + hi;
    const double pi = std::numbers::pi;
    const double k = std::ceil((a - pi / 2) / pi);
    double mincos;
    if (pi / 2 + k * pi <= b) {
        mincos = 0.0;
    } else {
        mincos = std::min(std::abs(std::cos(a)), std::abs(std::cos(b)));
    }
    return std::max(0.0, mincos - std::abs(t));
}

inline std::vector<cplx> eigenvalues(const CMatrix& a) {
    Eigen::ComplexEigenSolver<CMatrix> es(a, false);
    if (es.info() != Eigen::Success) throw DomainError("eigensolver failed");
    return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

/// Spectrum of a unitary through its Cayley transform
/// A = i(1 − V)(1 + V)^{-1}, V = e^{iφ}U, which is Hermitian with eigenvalues
/// tan(θ/2) for V = e^{iθ}. The map is one-to-one on (−π, π), so a
/// self-adjoint solve suffices; several times faster than a complex Schur
/// form at n in the hundreds. φ is moved until 1 + V is well conditioned.
inline std::vector<cplx> unitary_eigenvalues(const CMatrix& u) {
    const auto d = u.rows();
    if (u.cols() != d) throw ValidationError("unitary_eigenvalues: matrix must be square");
    const CMatrix id = CMatrix::Identity(d, d);
    for (int attempt = 0; attempt < 16; ++attempt) {
        // golden-angle steps spread the trial phases
        const double phi = 0.5 + attempt * 2.399963229728653;
        const CMatrix v = std::polar(1.0, phi) * u;
        Eigen::PartialPivLU<CMatrix> lu(id + v);
        if (lu.rcond() < 1e-6) continue;
        CMatrix a = cplx(0.0, 1.0) * lu.solve(id - v).eval(); // (1 + V) and (1 − V) commute
        a = real_part(a);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) break;
        std::vector<cplx> out(d);
        for (Eigen::Index k = 0; k < d; ++k) out[k] = std::polar(1.0, 2.0 * std::atan(es.eigenvalues()(k)) - phi);
        return out;
    }
    return eigenvalues(u); // fall back to the general solver
}

struct DOSEstimate {
    int bins = 0;
    int samples = 0;
    std::vector<double> mass;
    std::vector<double> stderr_;
    std::vector<std::vector<cplx>> spectra; ///< per sample, for support checks

    double bin_width() const { return 2 * std::numbers::pi / bins; }
    double center(int b) const { return (b + 0.5) * bin_width(); }
};

inline int phase_bin(cplx z, int bins) {
    const double p = phase_0_2pi(z);
    int b = static_cast<int>(std::floor(p / (2 * std::numbers::pi) * bins));
    return std::clamp(b, 0, bins - 1);
}

/// Runs f(k) for k = 0..count−1 on up to `threads` workers. Results must be
/// written to per-index slots so merge order never matters.
template <class F>
void parallel_for(int count, int threads, F&& f) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int k = 0; k < count; ++k) f(k);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errs(threads);
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            try {
                for (int k = next++; k < count; k = next++) f(k);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

inline DOSEstimate density_of_states(const DisorderModel& model, int samples, int bins, std::uint64_t master_seed,
                                     int threads = 1) {
    validate_disorder(model);
    if (samples < 1) throw ValidationError("density_of_states: samples must be >= 1");
    if (bins < 1) throw ValidationError("density_of_states: bins must be >= 1");
    DOSEstimate est;
    est.bins = bins;
    est.samples = samples;
    est.spectra.resize(samples);
    parallel_for(samples, threads, [&](int s) {
        const auto smp = sample_disordered_walk(model, derive_seed(master_seed, s));
        est.spectra[s] = unitary_eigenvalues(smp.walk.w);
    });
    std::vector<double> sum(bins, 0.0), sum2(bins, 0.0);
    for (const auto& spec : est.spectra) {
        std::vector<double> h(bins, 0.0);
        for (const cplx& z : spec) h[phase_bin(z, bins)] += 1.0 / spec.size();
        for (int b = 0; b < bins; ++b) {
            sum[b] += h[b];
            sum2[b] += h[b] * h[b];
        }
    }
    est.mass.resize(bins);
    est.stderr_.resize(bins);
    for (int b = 0; b < bins; ++b) {
        est.mass[b] = sum[b] / samples;
        const double var = samples > 1 ? std::max(0.0, (sum2[b] - samples * est.mass[b] * est.mass[b]) / (samples - 1)) : 0.0;
        est.stderr_[b] = std::sqrt(var / samples);
    }
    return est;
}

/// Bins whose arc meets the band set ∪_{θ∈[lo,hi]} e^{−iθ}Λ±.
inline std::vector<char> band_bins(double t, double lo, double hi, int bins) {
    std::vector<char> in(bins, 0);
    const double w = 2 * std::numbers::pi / bins;
    constexpr int probes = 32;
    for (int b = 0; b < bins; ++b)
        for (int k = 0; k <= probes && !in[b]; ++k)
            if (band_excess(std::polar(1.0, (b + static_cast<double>(k) / probes) * w), t, lo, hi) == 0.0) in[b] = 1;
    return in;
}

struct SupportReport {
    double max_excess = 0.0;  ///< worst band_excess over all sampled eigenvalues
    int outside = 0;          ///< eigenvalues with excess above the tolerance
    int stray_bins = 0;       ///< occupied bins farther than one bin from the bands
    int missed_edges = 0;     ///< band edge bins farther than one bin from any occupied bin
};

inline SupportReport support_report(const DOSEstimate& est, const DisorderModel& model, double tol = 1e-8) {
    SupportReport rep;
    const double lo = model.mu.lo(), hi = model.mu.hi();
    for (const auto& spec : est.spectra)
        for (const cplx& z : spec) {
            const double e = band_excess(z, model.t, lo, hi);
            rep.max_excess = std::max(rep.max_excess, e);
            if (e > tol) ++rep.outside;
        }
    const int nb = est.bins;
    const auto band = band_bins(model.t, lo, hi, nb);
    auto near = [&](const std::vector<char>& set, int b) {
        for (int db = -1; db <= 1; ++db)
            if (set[((b + db) % nb + nb) % nb]) return true;
        return false;
    };
    std::vector<char> occ(nb, 0);
    for (int b = 0; b < nb; ++b) occ[b] = est.mass[b] > 0.0;
    for (int b = 0; b < nb; ++b) {
        if (occ[b] && !near(band, b)) ++rep.stray_bins;
        const bool edge = band[b] && (!band[(b + 1) % nb] || !band[(b + nb - 1) % nb]);
        if (edge && !near(occ, b)) ++rep.missed_edges;
    }
    return rep;
}

struct AveragedDensity {
    double value = 0.0;  ///< mean over samples of (1/n) tr 2Re F(M^(n)*)
    double stderr_ = 0.0;
    double dos_value = 0.0; ///< 2 ∫ 2Re F(e^{−iθ}) dk(θ) from independent draws
    double dos_stderr = 0.0;
    double bias_bound = 0.0; ///< deterministic finite-n gap between the two
    int used = 0;
    std::vector<int> skipped;    ///< draws left out of both means
    std::vector<int> non_cyclic; ///< draws with spr(M) = 1 to working precision
};

/// Averaged asymptotic density and its density-of-states counterpart.
/// The DOS side uses seeds disjoint from the trace side so the two
/// estimates are statistically independent.
///
/// A draw with spr(M) = 1 has no unique limit state and is skipped. With
/// keep_non_cyclic the trace is still taken (it is a polynomial in M and
/// always defined) and the draw is only flagged. The clean ring needs this:
/// its Bloch eigenvalues depend on cos k alone, so k and −k pair up and one
/// combination of each pair vanishes at ψ*.
inline AveragedDensity averaged_density(const DisorderModel& model, const SymbolFunction& f, double alpha,
                                        int samples, std::uint64_t master_seed, int threads = 1,
                                        bool keep_non_cyclic = false) {
    validate_disorder(model);
    validate_coefficients(f, 0);
    require_nondegenerate_alpha(alpha);
    if (samples < 2) throw ValidationError("averaged_density: need at least 2 samples");

    std::vector<double> trace_val(samples, 0.0), dos_val(samples, 0.0);
    std::vector<char> ok(samples, 0), cyclic(samples, 0);
    const double n = model.n;
    parallel_for(samples, threads, [&](int s) {
        const auto a = sample_disordered_walk(model, derive_seed(master_seed, 2 * static_cast<std::uint64_t>(s)));
        const CMatrix& w = a.walk.w;
        // M^(n) = (1 + (cos α − 1)P) W^(n); same traces as W(1 + (cos α − 1)P)
        const CMatrix m = w + (std::cos(alpha) - 1.0) * a.walk.star * (a.walk.star.adjoint() * w);
        cyclic[s] = spectral_radius(m) < 1.0 - 1e-12;
        if (!cyclic[s] && !keep_non_cyclic) return;
        ok[s] = 1;
        trace_val[s] = 2.0 * real_part(eval_series(f, m.adjoint())).trace().real() / n;

        const auto b = sample_disordered_walk(model, derive_seed(master_seed, 2 * static_cast<std::uint64_t>(s) + 1));
        double acc = 0.0;
        const auto ev = unitary_eigenvalues(b.walk.w);
        for (const cplx& z : ev) acc += 2.0 * f(std::conj(z)).real();
        dos_val[s] = 2.0 * acc / static_cast<double>(ev.size());
    });

    AveragedDensity out;
    double s1 = 0, s2 = 0, d1 = 0, d2 = 0;
    for (int s = 0; s < samples; ++s) {
        if (!cyclic[s]) out.non_cyclic.push_back(s);
        if (!ok[s]) {
            out.skipped.push_back(s);
            continue;
        }
        ++out.used;
        s1 += trace_val[s];
        s2 += trace_val[s] * trace_val[s];
        d1 += dos_val[s];
        d2 += dos_val[s] * dos_val[s];
    }
    if (out.used < 2) throw DomainError("averaged_density: fewer than 2 usable samples");
    const double k = out.used;
    out.value = s1 / k;
    out.dos_value = d1 / k;
    out.stderr_ = std::sqrt(std::max(0.0, (s2 - k * out.value * out.value) / (k - 1)) / k);
    out.dos_stderr = std::sqrt(std::max(0.0, (d2 - k * out.dos_value * out.dos_value) / (k - 1)) / k);
    // M − W = (cos α − 1) P W has rank one and norm |cos α − 1|, so
    // |tr M^ℓ − tr W^ℓ| ≤ ℓ |cos α − 1|.
    double bound = 0.0;
    for (int l = 1; l <= f.l_max(); ++l) bound += std::abs(f.c[l]) * l * std::abs(std::cos(alpha) - 1.0);
    out.bias_bound = 2.0 * bound / n;
    return out;
}

} // namespace fermiwalk
